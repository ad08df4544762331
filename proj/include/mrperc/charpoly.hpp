#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "mrperc/matrix.hpp"
#include "mrperc/threshold.hpp"

namespace mrperc {

/// Largest k accepted by the characteristic-polynomial route (degree <= 512).
inline constexpr int charpoly_max_k = 10;

/// P(p) = det(I - M(p)) up to a positive constant factor exp(log_scale).
///
/// P is interpolated through Chebyshev nodes on [0, domain]. Evaluation goes
/// through the barycentric form on those nodes; the monomial coefficients
/// are reported alongside and checked against held-out determinants.
struct CharPoly {
  int degree = 0;
  /// Right end of the interpolation interval; the threshold lies in (0, domain].
  double domain = 1.0;
  /// Monomial coefficients in t = p / domain, constant term first.
  std::vector<double> coefficients;
  std::vector<double> nodes;
  /// Scaled determinants at `nodes`.
  std::vector<double> values;
  double log_scale = 0.0;
  /// max |P_monomial - det| / max |det| over the held-out nodes.
  double validation_residual = 0.0;

  /// Barycentric evaluation through the interpolation nodes.
  double operator()(double x) const {
    const std::size_t n = nodes.size();
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = x - nodes[j];
      if (diff == 0.0) return values[j];
      // First-kind Chebyshev weights: (-1)^j sin((2j+1) pi / (2n)).
      const double w = ((j & 1) ? -1.0 : 1.0) *
                       std::sin((2.0 * static_cast<double>(j) + 1.0) * std::numbers::pi / (2.0 * static_cast<double>(n)));
      const double t = w / diff;
      num += t * values[j];
      den += t;
    }
    return num / den;
  }

  /// Horner evaluation of the monomial coefficients at p = x.
  double monomial(double x) const {
    const double t = x / domain;
    double s = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) s = s * t + *it;
    return s;
  }
};

struct LogDeterminant {
  double log_abs;
  int sign;  ///< 0 when singular
};

/// log|det(I - A)| and its sign via sparse LU.
inline LogDeterminant log_det_identity_minus(const NumericMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a.nonzeros() + a.size());
  for (Eigen::Index i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);
  a.for_each([&](std::size_t i, std::size_t j, double v) {
    trips.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), -v);
  });
  Eigen::SparseMatrix<double> s(n, n);
  s.setFromTriplets(trips.begin(), trips.end());
  s.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(s);
  if (lu.info() != Eigen::Success) return {-std::numeric_limits<double>::infinity(), 0};
  return {lu.logAbsDeterminant(), static_cast<int>(lu.signDeterminant())};
}

namespace detail {

/// First-kind Chebyshev nodes mapped to [0, b].
inline std::vector<double> chebyshev_nodes(std::size_t count, double b = 1.0) {
  std::vector<double> x(count);
  const double n = static_cast<double>(count);
  for (std::size_t j = 0; j < count; ++j)
    x[j] = 0.5 * b * (1.0 + std::cos((2.0 * static_cast<double>(j) + 1.0) * std::numbers::pi / (2.0 * n)));
  return x;
}

/// Interpolation interval end: min(1, 2 / d^k). Dropping the shorter ranges
/// leaves a d^k-ary tree, so p_{k,c} <= 1/d^k.
inline double charpoly_domain(const ModelParams& params) {
  return std::min(1.0, 2.0 / std::pow(static_cast<double>(params.d), params.k));
}

/// Newton divided differences, then expansion of the nested form into monomials.
inline std::vector<double> newton_to_monomial(const std::vector<double>& x, std::vector<double> c) {
  const std::size_t n = x.size();
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = n - 1; i >= j; --i) c[i] = (c[i] - c[i - 1]) / (x[i] - x[i - j]);
  std::vector<double> poly{c[n - 1]};
  for (std::size_t jj = n - 1; jj-- > 0;) {
    // poly <- poly * (t - x_jj) + c_jj
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i];
      next[i] -= x[jj] * poly[i];
    }
    next[0] += c[jj];
    poly = std::move(next);
  }
  return poly;
}

inline void require_charpoly_range(int k) {
  if (k > charpoly_max_k)
    throw SolverError(ErrorCode::unsupported_degree,
                      "characteristic polynomial supports k <= " + std::to_string(charpoly_max_k) +
                          "; use bisection for larger k");
}

}  // namespace detail

/// Characteristic polynomial det(I - M(p_k)) in the free variable p_k.
///
/// Its degree is at most the number of types with a_1 = 1, since only those
/// rows depend on p_k and each does so affinely.
inline CharPoly charpoly(const ModelParams& params) {
  params.validate();
  detail::require_charpoly_range(params.k);
  detail::reject_certain_percolation(params);
  const MeanMatrix m = build_mean_matrix(params.with_pk(0.5));
  int degree = 0;
  for (BranchType t : m.space().types()) degree += t.bit(1) ? 1 : 0;

  CharPoly cp;
  cp.degree = degree;
  cp.domain = detail::charpoly_domain(params);
  cp.nodes = detail::chebyshev_nodes(static_cast<std::size_t>(degree) + 1, cp.domain);

  std::vector<double> held_out;
  for (int i = 0; i < 8; ++i) held_out.push_back(cp.domain * (i + 0.5) / 8.0);

  std::vector<LogDeterminant> dets;
  for (double x : cp.nodes) dets.push_back(log_det_identity_minus(evaluate(m, x)));
  std::vector<LogDeterminant> check;
  for (double x : held_out) check.push_back(log_det_identity_minus(evaluate(m, x)));

  double scale = -std::numeric_limits<double>::infinity();
  for (const auto& v : dets) scale = std::max(scale, v.log_abs);
  if (!std::isfinite(scale)) scale = 0.0;
  cp.log_scale = scale;
  auto scaled = [scale](const LogDeterminant& v) { return v.sign == 0 ? 0.0 : v.sign * std::exp(v.log_abs - scale); };
  for (const auto& v : dets) cp.values.push_back(scaled(v));

  std::vector<double> t(cp.nodes.size());
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = cp.nodes[j] / cp.domain;
  cp.coefficients = detail::newton_to_monomial(t, cp.values);

  double vmax = 0.0;
  for (double v : cp.values) vmax = std::max(vmax, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < held_out.size(); ++i) {
    const double err = std::abs(cp.monomial(held_out[i]) - scaled(check[i]));
    worst = std::isfinite(err) ? std::max(worst, err) : std::numeric_limits<double>::infinity();
  }
  cp.validation_residual = vmax > 0.0 ? worst / vmax : worst;
  return cp;
}

/// Smallest root of P in (0, domain]: sign-change scan on a 4096-point grid,
/// then bisection of the bracketing cell down to 1e-12 relative to domain.
inline double smallest_positive_root(const CharPoly& cp) {
  constexpr int grid = 4096;
  const double p0 = cp(0.0);
  if (p0 == 0.0) throw SolverError(ErrorCode::no_root, "P(0) = 0: base is critical");
  const bool positive = p0 > 0.0;
  auto crosses = [&](double v) { return positive ? v <= 0.0 : v >= 0.0; };

  double prev = 0.0;
  for (int i = 1; i <= grid; ++i) {
    const double x = cp.domain * static_cast<double>(i) / grid;
    const double v = cp(x);
    if (crosses(v)) {
      if (v == 0.0) return x;
      double lo = prev, hi = x;
      while (hi - lo > 1e-12 * cp.domain) {
        const double mid = 0.5 * (lo + hi);
        const double pm = cp(mid);
        if (pm == 0.0) return mid;
        (crosses(pm) ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = x;
  }
  throw SolverError(ErrorCode::no_root, "det(I - M(p_k)) has no sign change in (0, domain]");
}

/// Threshold as the first positive root of det(I - M(p_k)).
inline ThresholdResult charpoly_threshold(const ModelParams& params) {
  params.validate();
  detail::require_charpoly_range(params.k);
  detail::reject_certain_percolation(params);
  const ModelParams base = params.with_pk(0.5);
  const MeanMatrix m = build_mean_matrix(base);
  detail::RhoProbe probe(m);
  detail::subcritical_start(base, probe, 1e-9);

  const CharPoly cp = charpoly(params);
  ThresholdResult res;
  res.method = Method::charpoly;
  res.p_kc = smallest_positive_root(cp);
  res.lo = res.hi = res.p_kc;
  res.rho_residual = std::abs(perron_root(evaluate(m, res.p_kc)).rho - 1.0);
  res.evaluations = static_cast<long>(cp.nodes.size()) + 8 + probe.evaluations();
  res.params = params.with_pk(res.p_kc);
  return res;
}

}  // namespace mrperc
