#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include "mrperc/matrix.hpp"
#include "mrperc/model.hpp"
#include "mrperc/spectral.hpp"
#include "mrperc/typespace.hpp"

namespace mrperc {

enum class Method { bisect, charpoly, closed_form_k2 };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::bisect: return "bisect";
    case Method::charpoly: return "charpoly";
    case Method::closed_form_k2: return "closed_form_k2";
  }
  return "unknown";
}

struct ThresholdResult {
  double p_kc = 0.0;
  Method method = Method::bisect;
  double lo = 0.0;
  double hi = 0.0;
  /// |rho(M(p_kc)) - 1|.
  double rho_residual = 0.0;
  /// Number of Perron-root (or determinant) evaluations spent.
  long evaluations = 0;
  ModelParams params;
};

/// Bound from domination by a single-type branching process:
/// max(0, (1 - sum_{l<k} d^l p_l) / d^k).
inline double lower_bound(const ModelParams& params) {
  double mass = 0.0, dl = 1.0;
  for (int l = 1; l < params.k; ++l) {
    dl *= params.d;
    mass += dl * params.prob(l);
  }
  dl *= params.d;
  return std::max(0.0, (1.0 - mass) / dl);
}

/// Critical p_2 for k = 2, valid for 0 <= p1 < 1/d.
inline double closed_form_k2(int d, double p1) {
  if (d < 2) throw std::invalid_argument("degree d must be >= 2");
  if (!(p1 >= 0.0)) throw std::invalid_argument("p1 must be nonnegative");
  if (!(p1 * d < 1.0))
    throw SolverError(ErrorCode::domain_error, "closed form requires p1 < 1/d");
  const double dd = d;
  const double root = std::sqrt((dd - 1.0) * (3.0 * dd * p1 + dd + p1 - 1.0));
  const double v = 1.0 / (2.0 * dd) + 1.0 / (2.0 * dd * dd) - root / (2.0 * dd * dd * std::sqrt(1.0 - p1));
  return std::max(0.0, v);
}

namespace detail {

/// Perron-root evaluations of M(p_k) sharing a warm-start vector.
class RhoProbe {
 public:
  explicit RhoProbe(const MeanMatrix& m) : m_(m) {}

  /// Certified comparison of rho(M(pk)) against 1, stopping as soon as the
  /// Collatz-Wielandt sandwich excludes 1. Undecided cases use the estimate.
  bool supercritical(double pk) {
    PowerOptions opt;
    opt.separate_from = 1.0;
    const SpectralResult r = run(pk, opt);
    const int c = r.compare(1.0);
    return c > 0 || (c == 0 && r.rho >= 1.0);
  }

  SpectralResult full(double pk) { return run(pk, {}); }

  long evaluations() const { return evaluations_; }

 private:
  SpectralResult run(double pk, PowerOptions opt) {
    ++evaluations_;
    const NumericMatrix a = evaluate(m_, pk);
    if (warm_.size() == a.size()) opt.start = warm_;
    SpectralResult r = power_iterate(a, opt);
    if (std::all_of(r.vector.begin(), r.vector.end(), [](double v) { return v > 1e-280; }))
      warm_ = r.vector;
    return r;
  }

  const MeanMatrix& m_;
  std::vector<double> warm_;
  long evaluations_ = 0;
};

/// A fixed p_j = 1 (j < k) occupies every j-th vertex of a branch forever,
/// so the cluster is infinite for every p_k.
inline void reject_certain_percolation(const ModelParams& params) {
  for (int j = 1; j < params.k; ++j)
    if (params.prob(j) >= 1.0)
      throw SolverError(ErrorCode::supercritical_base,
                        "p_" + std::to_string(j) + " = 1: the cluster is infinite for every p_k");
}

/// Returns the lowest p_k known to be subcritical: the analytic lower bound
/// when positive, otherwise a probe just above zero. Throws when the
/// process with p_k -> 0 is already supercritical.
inline double subcritical_start(const ModelParams& params, RhoProbe& probe, double tol) {
  const double lb = lower_bound(params);
  if (lb > 0.0) return lb;
  const double eps = std::min(tol, 1e-9);
  if (probe.supercritical(eps))
    throw SolverError(ErrorCode::supercritical_base,
                      "process is supercritical as p_k -> 0; no threshold in p_k");
  return eps;
}

}  // namespace detail

/// Threshold by bisection on rho(M(p_k)) = 1.
///
/// The bracket starts at the analytic lower bound, where rho <= 1, and its
/// upper end grows geometrically until rho(M(hi)) > 1 is certified.
inline ThresholdResult bisect_threshold(const ModelParams& params, double tol = 1e-9) {
  params.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  detail::reject_certain_percolation(params);
  const ModelParams base = params.with_pk(0.5);
  const MeanMatrix m = build_mean_matrix(base);
  detail::RhoProbe probe(m);

  double lo = detail::subcritical_start(base, probe, tol);
  double gap = std::max(lo, 1e-4);
  double hi = std::min(1.0, lo + gap);
  while (!probe.supercritical(hi)) {
    if (hi >= 1.0)
      throw SolverError(ErrorCode::no_threshold, "rho(M(1)) <= 1; no threshold in (0, 1]");
    lo = hi;
    gap *= 2.0;
    hi = std::min(1.0, lo + gap);
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (probe.supercritical(mid) ? hi : lo) = mid;
  }

  ThresholdResult res;
  res.method = Method::bisect;
  res.p_kc = 0.5 * (lo + hi);
  res.lo = lo;
  res.hi = hi;
  res.rho_residual = std::abs(probe.full(res.p_kc).rho - 1.0);
  res.evaluations = probe.evaluations();
  res.params = params.with_pk(res.p_kc);
  return res;
}

/// Closed-form threshold for k = 2, with the Perron-root residual attached.
inline ThresholdResult closed_form_threshold(const ModelParams& params) {
  params.validate();
  if (params.k != 2) throw std::invalid_argument("closed form applies to k = 2 only");
  if (params.d * params.prob(1) >= 1.0)
    throw SolverError(ErrorCode::supercritical_base, "d p1 >= 1: supercritical base");
  ThresholdResult res;
  res.method = Method::closed_form_k2;
  res.p_kc = closed_form_k2(params.d, params.prob(1));
  res.lo = res.hi = res.p_kc;
  const MeanMatrix m = build_mean_matrix(params.with_pk(0.5));
  res.rho_residual = std::abs(perron_root(evaluate(m, res.p_kc)).rho - 1.0);
  res.evaluations = 1;
  res.params = params.with_pk(res.p_kc);
  return res;
}

}  // namespace mrperc
