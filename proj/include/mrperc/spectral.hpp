#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mrperc/matrix.hpp"

namespace mrperc {

struct PowerOptions {
  /// Stop once the Collatz-Wielandt sandwich is narrower than 2 tol max(1, rho).
  double tol = 1e-12;
  long max_iter = 1'000'000;
  /// Positive start vector; all ones when empty.
  std::vector<double> start;
  /// Stop early as soon as the sandwich excludes this value.
  std::optional<double> separate_from;
};

struct SpectralResult {
  double rho = 0.0;
  long iterations = 0;
  /// max_i |(A x)_i - rho x_i| / max_i x_i for the final iterate.
  double residual = 0.0;
  bool converged = false;
  /// Collatz-Wielandt bounds min_i (A x)_i / x_i <= rho(A) <= max_i (A x)_i / x_i.
  double lower = 0.0;
  double upper = 0.0;
  /// Final iterate, scaled to unit max norm.
  std::vector<double> vector;

  double width() const { return upper - lower; }
  /// Certified position relative to `v`: -1 below, +1 above, 0 undecided.
  int compare(double v) const { return upper < v ? -1 : (lower > v ? 1 : 0); }
};

/// Normalized power iteration on A + I.
///
/// The shift makes any irreducible nonnegative A primitive, so the iteration
/// converges even for periodic matrices; the reported bounds are for A.
inline SpectralResult power_iterate(const NumericMatrix& a, const PowerOptions& opt = {}) {
  const std::size_t n = a.size();
  if (n == 0) throw std::invalid_argument("empty matrix");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  SpectralResult res;
  if (a.nonzeros() == 0) {
    res.converged = true;
    res.vector.assign(n, 1.0);
    return res;
  }

  std::vector<double> x = opt.start;
  if (x.empty()) x.assign(n, 1.0);
  if (x.size() != n) throw std::invalid_argument("start vector has wrong length");
  double xmax = 0.0;
  for (double v : x) {
    if (!(v > 0.0)) throw std::invalid_argument("start vector must be positive");
    xmax = std::max(xmax, v);
  }
  for (double& v : x) v /= xmax;

  std::vector<double> ax(n);
  double lo = 0.0, hi = 0.0, growth = 0.0;
  for (long it = 1;; ++it) {
    a.multiply(x, ax);
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    growth = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ax[i] / x[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      growth = std::max(growth, ax[i] + x[i]);
    }
    lo = std::max(lo, 0.0);
    res.iterations = it;
    const bool tight = hi - lo <= 2.0 * opt.tol * std::max(1.0, hi);
    const bool separated = opt.separate_from && (lo > *opt.separate_from || hi < *opt.separate_from);
    if (tight || separated || it >= opt.max_iter) {
      res.converged = tight;
      break;
    }
    double ymax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += ax[i];
      ymax = std::max(ymax, x[i]);
    }
    for (double& v : x) v /= ymax;
  }

  res.lower = lo;
  res.upper = hi;
  // Unconverged (e.g. reducible input): fall back on the growth of the
  // largest component, kept inside the certified bounds.
  res.rho = res.converged ? 0.5 * (lo + hi) : std::clamp(growth - 1.0, lo, hi);
  double r = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r = std::max(r, std::abs(ax[i] - res.rho * x[i]));
    norm = std::max(norm, x[i]);
  }
  res.residual = r / norm;
  res.vector = std::move(x);
  return res;
}

/// Perron root of a nonnegative irreducible matrix, starting from all ones.
/// When `max_iter` is exhausted the best estimate is returned with converged = false.
inline SpectralResult perron_root(const NumericMatrix& a, double tol = 1e-12, long max_iter = 1'000'000) {
  PowerOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  return power_iterate(a, opt);
}

}  // namespace mrperc
