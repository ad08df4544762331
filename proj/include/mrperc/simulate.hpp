#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mrperc/model.hpp"
#include "mrperc/parallel.hpp"
#include "mrperc/typespace.hpp"

namespace mrperc {

/// Largest k the simulator accepts; populations are indexed by type code.
inline constexpr int simulate_max_k = 20;

struct SimConfig {
  ModelParams params;  ///< all k probabilities, p_k included
  int generations = 60;
  long replicas = 100'000;
  std::uint64_t seed = 0;
  std::uint64_t population_cap = 10'000'000;

  void validate() const {
    params.validate();
    if (params.k > simulate_max_k)
      throw std::invalid_argument("simulation supports k <= " + std::to_string(simulate_max_k));
    if (generations < 1) throw std::invalid_argument("generations must be >= 1");
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    if (population_cap < 1) throw std::invalid_argument("population cap must be >= 1");
  }
};

struct SurvivalEstimate {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long replicas = 0;
  int generations = 0;
  double capped_fraction = 0.0;
};

/// Per-type offspring law, indexed by type code: an individual of type a
/// has Binomial(d, q(a)) children of type a'_1 and the rest of type a'_0.
class OffspringTable {
 public:
  explicit OffspringTable(const ModelParams& params) : d_(params.d), k_(params.k) {
    params.validate();
    const std::uint32_t n = std::uint32_t{1} << k_;
    q_.assign(n, 0.0);
    one_.assign(n, 0);
    zero_.assign(n, 0);
    for (std::uint32_t c = 1; c < n; ++c) {
      const BranchType a{c, k_};
      q_[c] = occupation_probability(a, params);
      const Successors s = successors(a);
      one_[c] = s.one.code();
      zero_[c] = s.zero ? s.zero->code() : 0u;
    }
  }

  int d() const { return d_; }
  int k() const { return k_; }
  /// Number of slots (2^k); slot 0 is unused.
  std::size_t slots() const { return q_.size(); }
  double q(std::uint32_t code) const { return q_[code]; }
  std::uint32_t one(std::uint32_t code) const { return one_[code]; }
  /// 0 when a'_0 is the all-zero word.
  std::uint32_t zero(std::uint32_t code) const { return zero_[code]; }

 private:
  int d_;
  int k_;
  std::vector<double> q_;
  std::vector<std::uint32_t> one_;
  std::vector<std::uint32_t> zero_;
};

/// One generation of the type-count process. `counts[c]` is the number of
/// individuals with type code c; children of all-zero type are discarded.
template <class Rng>
std::vector<std::uint64_t> run_generation(const OffspringTable& table, std::span<const std::uint64_t> counts,
                                          Rng& rng) {
  if (counts.size() != table.slots()) throw std::invalid_argument("counts must have 2^k slots");
  std::vector<std::uint64_t> next(counts.size(), 0);
  for (std::uint32_t c = 1; c < counts.size(); ++c) {
    const std::uint64_t n = counts[c];
    if (n == 0) continue;
    const std::uint64_t slots = n * static_cast<std::uint64_t>(table.d());
    const double q = table.q(c);
    std::uint64_t occupied;
    if (q <= 0.0) occupied = 0;
    else if (q >= 1.0) occupied = slots;
    else occupied = std::binomial_distribution<std::uint64_t>(slots, q)(rng);
    next[table.one(c)] += occupied;
    if (table.zero(c) != 0) next[table.zero(c)] += slots - occupied;
  }
  return next;
}

/// Generator for replica `replica` of a run seeded with `seed`.
inline std::mt19937_64 replica_rng(std::uint64_t seed, std::uint64_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
  return std::mt19937_64(seq);
}

enum class ReplicaOutcome { extinct, alive, capped };

/// Runs one replica from a single individual of type (0, ..., 0, 1).
inline ReplicaOutcome run_replica(const OffspringTable& table, const SimConfig& cfg, std::uint64_t replica) {
  auto rng = replica_rng(cfg.seed, replica);
  std::vector<std::uint64_t> counts(table.slots(), 0);
  counts[1] = 1;
  for (int g = 0; g < cfg.generations; ++g) {
    counts = run_generation(table, counts, rng);
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) total += c;
    if (total == 0) return ReplicaOutcome::extinct;
    if (total >= cfg.population_cap) return ReplicaOutcome::capped;
  }
  return ReplicaOutcome::alive;
}

/// 95% Wilson score interval for `successes` out of `n`.
inline std::pair<double, double> wilson_interval(long successes, long n) {
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

/// Fraction of replicas alive at the horizon or past the population cap.
/// Deterministic given the seed, independent of the worker count.
inline SurvivalEstimate estimate_survival(const SimConfig& cfg) {
  cfg.validate();
  const OffspringTable table(cfg.params);
  std::vector<ReplicaOutcome> outcome(static_cast<std::size_t>(cfg.replicas));
  parallel_for(outcome.size(), [&](std::size_t r) { outcome[r] = run_replica(table, cfg, r); });

  long survived = 0, capped = 0;
  for (ReplicaOutcome o : outcome) {
    survived += o != ReplicaOutcome::extinct;
    capped += o == ReplicaOutcome::capped;
  }
  SurvivalEstimate est;
  est.replicas = cfg.replicas;
  est.generations = cfg.generations;
  est.p_hat = static_cast<double>(survived) / static_cast<double>(cfg.replicas);
  std::tie(est.ci_low, est.ci_high) = wilson_interval(survived, cfg.replicas);
  est.capped_fraction = static_cast<double>(capped) / static_cast<double>(cfg.replicas);
  return est;
}

}  // namespace mrperc
