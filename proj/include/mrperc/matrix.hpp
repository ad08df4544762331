#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mrperc/model.hpp"
#include "mrperc/typespace.hpp"

namespace mrperc {

/// c0 + c1 * p_k.
struct AffineEntry {
  double c0 = 0.0;
  double c1 = 0.0;

  constexpr double at(double pk) const { return c0 + c1 * pk; }
  friend constexpr bool operator==(const AffineEntry&, const AffineEntry&) = default;
};

/// Compressed sparse row matrix of doubles.
class NumericMatrix {
 public:
  NumericMatrix() = default;
  explicit NumericMatrix(std::size_t n) : n_(n), row_ptr_(n + 1, 0) {}

  /// Builds from a dense row-major n x n array, keeping nonzero entries.
  static NumericMatrix from_dense(std::size_t n, std::span<const double> dense) {
    if (dense.size() != n * n) throw std::invalid_argument("dense matrix must be n x n");
    NumericMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        if (dense[i * n + j] != 0.0) m.push(j, dense[i * n + j]);
      m.finish_row(i);
    }
    return m;
  }

  std::size_t size() const { return n_; }
  std::size_t nonzeros() const { return val_.size(); }

  /// Appends an entry to the row currently being filled.
  void push(std::size_t col, double v) {
    col_.push_back(static_cast<std::int32_t>(col));
    val_.push_back(v);
  }
  void finish_row(std::size_t row) { row_ptr_[row + 1] = static_cast<std::int64_t>(val_.size()); }

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (auto e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
        s += val_[static_cast<std::size_t>(e)] * x[static_cast<std::size_t>(col_[static_cast<std::size_t>(e)])];
      y[i] = s;
    }
  }

  double at(std::size_t i, std::size_t j) const {
    for (auto e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
      if (static_cast<std::size_t>(col_[static_cast<std::size_t>(e)]) == j)
        return val_[static_cast<std::size_t>(e)];
    return 0.0;
  }

  double row_sum(std::size_t i) const {
    double s = 0.0;
    for (auto e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) s += val_[static_cast<std::size_t>(e)];
    return s;
  }

  std::vector<double> to_dense() const {
    std::vector<double> d(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (auto e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
        d[i * n_ + static_cast<std::size_t>(col_[static_cast<std::size_t>(e)])] += val_[static_cast<std::size_t>(e)];
    return d;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < n_; ++i)
      for (auto e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
        f(i, static_cast<std::size_t>(col_[static_cast<std::size_t>(e)]), val_[static_cast<std::size_t>(e)]);
  }

  NumericMatrix scaled(double c) const {
    NumericMatrix m = *this;
    for (double& v : m.val_) v *= c;
    return m;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int32_t> col_;
  std::vector<double> val_;
};

/// One stored entry of a mean-matrix row.
struct MatrixEntry {
  std::int32_t col;
  AffineEntry value;
};

/// Expected-offspring matrix of the branch-type process, affine in p_k.
///
/// Row a holds d q(a) at column a'_1 and d (1 - q(a)) at column a'_0 when
/// those transitions are possible and the successor lies in the space. At
/// most two entries per row, stored with ascending column.
class MeanMatrix {
 public:
  struct Row {
    MatrixEntry entries[2];
    std::uint8_t count = 0;

    std::span<const MatrixEntry> view() const { return {entries, count}; }
  };

  MeanMatrix() = default;
  MeanMatrix(TypeSpace space, int d, std::vector<double> fixed, std::vector<Row> rows)
      : space_(std::move(space)), d_(d), fixed_(std::move(fixed)), rows_(std::move(rows)) {
    if (rows_.size() != space_.size()) throw std::invalid_argument("one row per type required");
  }

  const TypeSpace& space() const { return space_; }
  int d() const { return d_; }
  int k() const { return space_.k(); }
  /// p_1..p_{k-1}.
  const std::vector<double>& fixed() const { return fixed_; }
  std::size_t size() const { return rows_.size(); }
  std::span<const MatrixEntry> row(std::size_t i) const { return rows_[i].view(); }

  std::size_t stored_entries() const {
    std::size_t s = 0;
    for (const Row& r : rows_) s += r.count;
    return s;
  }

  /// Entry (i, j) as an affine function; zero when not stored.
  AffineEntry entry(std::size_t i, std::size_t j) const {
    for (const MatrixEntry& e : row(i))
      if (static_cast<std::size_t>(e.col) == j) return e.value;
    return {};
  }

 private:
  TypeSpace space_;
  int d_ = 2;
  std::vector<double> fixed_;
  std::vector<Row> rows_;
};

inline MeanMatrix build_mean_matrix(const TypeSpace& space, const ModelParams& params) {
  params.validate();
  if (space.k() != params.k) throw std::invalid_argument("type space built for a different k");
  const double d = params.d;
  std::vector<MeanMatrix::Row> rows(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const BranchType a = space[i];
    const EdgeProfile edges = edge_profile(a, params);
    const Successors next = successors(a);
    const double r = detail::closed_without_pk(a, params);
    // With a_1 = 1: q = 1 - r (1 - p_k); otherwise q = 1 - r.
    const double slope = a.bit(1) ? d * r : 0.0;
    MeanMatrix::Row& row = rows[i];
    if (edges.to_zero) {
      const auto col = space.index_of(*next.zero);
      if (col >= 0) row.entries[row.count++] = {col, {d * r, a.bit(1) ? -slope : 0.0}};
    }
    if (edges.to_one) {
      const auto col = space.index_of(next.one);
      if (col >= 0) row.entries[row.count++] = {col, {d * (1.0 - r), slope}};
    }
    if (row.count == 2 && row.entries[0].col > row.entries[1].col)
      std::swap(row.entries[0], row.entries[1]);
  }
  std::vector<double> fixed(params.p.begin(), params.p.end() - 1);
  return {space, params.d, std::move(fixed), std::move(rows)};
}

inline MeanMatrix build_mean_matrix(const ModelParams& params) {
  return build_mean_matrix(build_typespace(params), params);
}

/// Numeric matrix at the given p_k; entries are clamped to [0, d].
inline NumericMatrix evaluate(const MeanMatrix& m, double pk) {
  if (!(pk >= 0.0 && pk <= 1.0)) throw std::invalid_argument("p_k must lie in [0, 1]");
  const double d = m.d();
  NumericMatrix out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (const MatrixEntry& e : m.row(i)) {
      const double v = std::clamp(e.value.at(pk), 0.0, d);
      if (v != 0.0) out.push(static_cast<std::size_t>(e.col), v);
    }
    out.finish_row(i);
  }
  return out;
}

}  // namespace mrperc
