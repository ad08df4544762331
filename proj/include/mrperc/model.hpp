#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mrperc {

/// Largest supported range. 2^24 - 1 types keeps the sparse mean matrix in memory.
inline constexpr int max_range = 24;

enum class ErrorCode {
  supercritical_base,
  no_threshold,
  no_root,
  unsupported_degree,
  domain_error,
  internal_error,
};

inline std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::supercritical_base: return "supercritical-base";
    case ErrorCode::no_threshold: return "no-threshold";
    case ErrorCode::no_root: return "no-root";
    case ErrorCode::unsupported_degree: return "unsupported-degree";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::internal_error: return "internal-error";
  }
  return "unknown";
}

/// Solver failure carrying a machine-readable code. Argument validation
/// failures are reported as std::invalid_argument instead.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Tree degree d, maximum range k, and the range probabilities p_1..p_k.
///
/// p[l-1] holds p_l. Threshold solvers treat p_k as the free variable and
/// ignore the stored value of p.back().
struct ModelParams {
  int d = 2;
  int k = 1;
  std::vector<double> p;

  /// Builds parameters from the k-1 fixed probabilities; p_k is set to `pk`.
  static ModelParams with_fixed(int d, std::vector<double> fixed, double pk = 0.0) {
    ModelParams m;
    m.d = d;
    m.k = static_cast<int>(fixed.size()) + 1;
    m.p = std::move(fixed);
    m.p.push_back(pk);
    m.validate();
    return m;
  }

  double prob(int range) const { return p[static_cast<std::size_t>(range - 1)]; }
  double pk() const { return p.back(); }

  ModelParams with_pk(double pk) const {
    ModelParams m = *this;
    m.p.back() = pk;
    return m;
  }

  void validate() const {
    if (d < 2) throw std::invalid_argument("degree d must be >= 2");
    if (k < 1 || k > max_range)
      throw std::invalid_argument("range k must be in [1, " + std::to_string(max_range) + "]");
    if (p.size() != static_cast<std::size_t>(k))
      throw std::invalid_argument("probability vector length must equal k");
    for (double x : p)
      if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
};

/// Occupancy pattern (a_1, ..., a_k) of the last k vertices of a branch.
///
/// Encoded as an integer with a_1 in the most significant of the k low bits.
class BranchType {
 public:
  constexpr BranchType(std::uint32_t code, int k) : code_(code), k_(k) {}

  static BranchType from_string(std::string_view bits) {
    if (bits.empty() || bits.size() > static_cast<std::size_t>(max_range))
      throw std::invalid_argument("branch type must have 1.." + std::to_string(max_range) + " bits");
    std::uint32_t code = 0;
    for (char c : bits) {
      if (c != '0' && c != '1') throw std::invalid_argument("branch type digits must be 0 or 1");
      code = (code << 1) | static_cast<std::uint32_t>(c - '0');
    }
    if (code == 0) throw std::invalid_argument("the all-zero word is not a branch type");
    return {code, static_cast<int>(bits.size())};
  }

  constexpr std::uint32_t code() const { return code_; }
  constexpr int size() const { return k_; }

  /// a_i for 1 <= i <= k.
  constexpr bool bit(int i) const { return (code_ >> (k_ - i)) & 1u; }
  constexpr bool valid() const { return code_ != 0 && code_ < (std::uint32_t{1} << k_); }

  std::string to_string() const {
    std::string s(static_cast<std::size_t>(k_), '0');
    for (int i = 1; i <= k_; ++i)
      if (bit(i)) s[static_cast<std::size_t>(i - 1)] = '1';
    return s;
  }

  friend constexpr bool operator==(BranchType, BranchType) = default;

 private:
  std::uint32_t code_;
  int k_;
};

/// (0, ..., 0, 1), the type of the root.
constexpr BranchType initial_type(int k) { return {1u, k}; }

}  // namespace mrperc
