#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrperc/model.hpp"

namespace mrperc {

namespace detail {

inline void check_type(BranchType a, int k) {
  if (a.size() != k) throw std::invalid_argument("branch type length does not match k");
  if (!a.valid()) throw std::invalid_argument("invalid branch type");
}

/// Probability that no edge from an occupied x_i, i >= 2, reaches the next
/// vertex. The range-k edge from x_1 is excluded so the result does not
/// depend on p_k.
inline double closed_without_pk(BranchType a, const ModelParams& params) {
  const int k = params.k;
  double r = 1.0;
  for (int i = 2; i <= k; ++i)
    if (a.bit(i)) r *= 1.0 - params.prob(k + 1 - i);
  return r;
}

}  // namespace detail

/// q(a) = 1 - prod_{i : a_i = 1} (1 - p_{k+1-i}).
inline double occupation_probability(BranchType a, const ModelParams& params) {
  detail::check_type(a, params.k);
  double r = detail::closed_without_pk(a, params);
  if (a.bit(1)) r *= 1.0 - params.pk();
  return 1.0 - r;
}

struct Successors {
  std::optional<BranchType> zero;  ///< (a_2, ..., a_k, 0); empty for (1, 0, ..., 0)
  BranchType one;                  ///< (a_2, ..., a_k, 1)
};

inline Successors successors(BranchType a) {
  const int k = a.size();
  const std::uint32_t mask = (std::uint32_t{1} << k) - 1;
  const std::uint32_t shifted = (a.code() << 1) & mask;
  Successors s{std::nullopt, BranchType{shifted | 1u, k}};
  if (shifted != 0) s.zero = BranchType{shifted, k};
  return s;
}

/// Which successor transitions can carry positive probability for some
/// p_k in (0, 1), given the fixed p_1..p_{k-1}.
struct EdgeProfile {
  bool to_one;
  bool to_zero;
};

inline EdgeProfile edge_profile(BranchType a, const ModelParams& params) {
  const double r = detail::closed_without_pk(a, params);
  const bool nonnull_zero = successors(a).zero.has_value();
  return {a.bit(1) || r < 1.0, nonnull_zero && r > 0.0};
}

/// Irreducible class of (0, ..., 0, 1) in the successor graph, in ascending
/// order of the integer encoding.
class TypeSpace {
 public:
  TypeSpace() = default;
  TypeSpace(int k, std::vector<BranchType> types) : k_(k), types_(std::move(types)) {
    index_.assign(std::size_t{1} << k_, -1);
    for (std::size_t i = 0; i < types_.size(); ++i) {
      if (types_[i].size() != k_ || !types_[i].valid())
        throw std::invalid_argument("type space member has wrong length");
      if (i > 0 && types_[i].code() <= types_[i - 1].code())
        throw std::invalid_argument("type space must be strictly ascending");
      index_[types_[i].code()] = static_cast<std::int32_t>(i);
    }
    if (index_[1] < 0) throw std::invalid_argument("type space must contain (0,...,0,1)");
  }

  int k() const { return k_; }
  std::size_t size() const { return types_.size(); }
  const std::vector<BranchType>& types() const { return types_; }
  BranchType operator[](std::size_t i) const { return types_[i]; }

  /// Position of `a`, or -1 when `a` is outside the space.
  std::int32_t index_of(BranchType a) const {
    if (a.size() != k_ || !a.valid()) return -1;
    return index_[a.code()];
  }
  bool contains(BranchType a) const { return index_of(a) >= 0; }
  std::int32_t initial_index() const { return index_[1]; }

  /// Types reachable from the initial type that cannot return to it; they are
  /// dropped from the space. Only arises when some fixed p_j equals 1.
  const std::vector<BranchType>& dropped() const { return dropped_; }
  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (!dropped_.empty())
      w.push_back(std::to_string(dropped_.size()) +
                  " reachable type(s) cannot return to the initial type and were dropped");
    return w;
  }

 private:
  friend TypeSpace build_typespace(const ModelParams& params);

  int k_ = 0;
  std::vector<BranchType> types_;
  std::vector<std::int32_t> index_;
  std::vector<BranchType> dropped_;
};

/// Builds the class of (0, ..., 0, 1). Edges are decided symbolically in p_k,
/// so the result is valid for every p_k in (0, 1).
inline TypeSpace build_typespace(const ModelParams& params) {
  params.validate();
  const int k = params.k;
  const std::uint32_t n = std::uint32_t{1} << k;
  const std::uint32_t mask = n - 1;

  // Bit 0: edge to a'_1, bit 1: edge to a'_0.
  std::vector<std::uint8_t> edges(n, 0);
  for (std::uint32_t c = 1; c < n; ++c) {
    const EdgeProfile e = edge_profile(BranchType{c, k}, params);
    edges[c] = static_cast<std::uint8_t>((e.to_one ? 1 : 0) | (e.to_zero ? 2 : 0));
  }

  std::vector<std::uint8_t> forward(n, 0), backward(n, 0);
  std::vector<std::uint32_t> stack{1u};
  forward[1] = 1;
  while (!stack.empty()) {
    const std::uint32_t c = stack.back();
    stack.pop_back();
    const std::uint32_t s = (c << 1) & mask;
    if ((edges[c] & 1) && !forward[s | 1]) { forward[s | 1] = 1; stack.push_back(s | 1); }
    if ((edges[c] & 2) && !forward[s]) { forward[s] = 1; stack.push_back(s); }
  }

  // Predecessors of v are (v >> 1) with a_1 in {0, 1}; the edge kind is v's last bit.
  stack.push_back(1u);
  backward[1] = 1;
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    const std::uint8_t kind = (v & 1u) ? 1 : 2;
    for (std::uint32_t top = 0; top < 2; ++top) {
      const std::uint32_t u = (v >> 1) | (top << (k - 1));
      if (u == 0 || backward[u] || !(edges[u] & kind)) continue;
      backward[u] = 1;
      stack.push_back(u);
    }
  }

  std::vector<BranchType> members, dropped;
  for (std::uint32_t c = 1; c < n; ++c) {
    if (forward[c] && backward[c]) members.emplace_back(c, k);
    else if (forward[c]) dropped.emplace_back(c, k);
  }

  // A lone initial type must at least carry a self-loop (only possible for k = 1).
  if (members.size() == 1 && !(edges[1] & 1 && ((2u & mask) | 1u) == 1u))
    throw SolverError(ErrorCode::internal_error,
                      "initial type has no cycle through it; is p_k identically zero?");

  TypeSpace space(k, std::move(members));
  space.dropped_ = std::move(dropped);
  return space;
}

}  // namespace mrperc
