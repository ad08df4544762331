#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrperc/charpoly.hpp"
#include "mrperc/parallel.hpp"
#include "mrperc/threshold.hpp"

namespace mrperc {

/// Dispatches to the requested solver.
inline ThresholdResult solve_threshold(const ModelParams& params, Method method, double tol = 1e-9) {
  switch (method) {
    case Method::bisect: return bisect_threshold(params, tol);
    case Method::charpoly: return charpoly_threshold(params);
    case Method::closed_form_k2: return closed_form_threshold(params);
  }
  throw std::invalid_argument("unknown method");
}

/// Parameter varied by a sweep: a fixed probability p_j (j < k) or the degree.
struct SweepAxis {
  enum class Kind { probability, degree };
  Kind kind = Kind::probability;
  int index = 1;  ///< j for Kind::probability

  static SweepAxis probability(int j) { return {Kind::probability, j}; }
  static SweepAxis degree() { return {Kind::degree, 0}; }

  std::string name() const { return kind == Kind::degree ? "d" : "p" + std::to_string(index); }
};

struct SweepRow {
  double axis_value = 0.0;
  std::optional<ThresholdResult> result;
  std::string error;  ///< error code when `result` is empty
};

/// Solves one threshold per grid value. Points are independent; failures
/// are recorded in the row and do not stop the sweep. Output order follows
/// the grid.
inline std::vector<SweepRow> sweep(const std::vector<double>& grid,
                                   const std::function<ModelParams(double)>& make_params, Method method,
                                   double tol = 1e-9) {
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.axis_value = grid[i];
    try {
      row.result = solve_threshold(make_params(grid[i]), method, tol);
    } catch (const SolverError& e) {
      row.error = std::string(to_string(e.code()));
    } catch (const std::invalid_argument& e) {
      row.error = std::string("invalid-argument: ") + e.what();
    }
  });
  return rows;
}

inline std::vector<SweepRow> sweep(const ModelParams& base, SweepAxis axis, const std::vector<double>& grid,
                                   Method method, double tol = 1e-9) {
  if (axis.kind == SweepAxis::Kind::probability && (axis.index < 1 || axis.index >= base.k))
    throw std::invalid_argument("sweep axis must be p_j with 1 <= j < k");
  return sweep(
      grid,
      [&](double v) {
        ModelParams p = base;
        if (axis.kind == SweepAxis::Kind::degree) {
          if (v != static_cast<double>(static_cast<int>(v)))
            throw std::invalid_argument("degree grid values must be integers");
          p.d = static_cast<int>(v);
        } else {
          p.p[static_cast<std::size_t>(axis.index - 1)] = v;
        }
        p.validate();
        return p;
      },
      method, tol);
}

}  // namespace mrperc
