#pragma once

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrperc/matrix.hpp"

namespace mrperc {

/// Symbolic dump:
///   {"d":2,"k":2,"p":[0.25],"types":["01","10","11"],
///    "entries":[{"row":0,"col":1,"c0":1.5,"c1":0}, ...]}
/// Entries are listed row by row with ascending column.
inline nlohmann::json to_json(const MeanMatrix& m) {
  nlohmann::json types = nlohmann::json::array();
  for (BranchType t : m.space().types()) types.push_back(t.to_string());
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const MatrixEntry& e : m.row(i))
      entries.push_back({{"row", i}, {"col", e.col}, {"c0", e.value.c0}, {"c1", e.value.c1}});
  return {{"d", m.d()}, {"k", m.k()}, {"p", m.fixed()}, {"types", types}, {"entries", entries}};
}

inline MeanMatrix mean_matrix_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("d").get<int>();
    const int k = j.at("k").get<int>();
    auto fixed = j.at("p").get<std::vector<double>>();
    if (d < 2) throw std::invalid_argument("degree d must be >= 2");
    if (k < 1 || k > max_range) throw std::invalid_argument("k out of range");
    if (fixed.size() != static_cast<std::size_t>(k - 1))
      throw std::invalid_argument("\"p\" must hold k-1 probabilities");
    std::vector<BranchType> types;
    for (const auto& s : j.at("types")) {
      BranchType t = BranchType::from_string(s.get<std::string>());
      if (t.size() != k) throw std::invalid_argument("type length does not match k");
      types.push_back(t);
    }
    TypeSpace space(k, std::move(types));
    std::vector<MeanMatrix::Row> rows(space.size());
    for (const auto& e : j.at("entries")) {
      const auto r = e.at("row").get<std::size_t>();
      const auto c = e.at("col").get<std::int32_t>();
      if (r >= rows.size() || c < 0 || static_cast<std::size_t>(c) >= rows.size())
        throw std::invalid_argument("entry index out of range");
      auto& row = rows[r];
      if (row.count == 2) throw std::invalid_argument("more than two entries in a row");
      if (row.count == 1 && row.entries[0].col >= c)
        throw std::invalid_argument("entries must have ascending columns within a row");
      row.entries[row.count++] = {c, {e.at("c0").get<double>(), e.at("c1").get<double>()}};
    }
    return {std::move(space), d, std::move(fixed), std::move(rows)};
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("malformed matrix JSON: ") + ex.what());
  }
}

inline std::string format_number(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Numeric dump at p_k: header `row_type,col_type,value`, one line per stored entry.
inline std::string to_csv(const MeanMatrix& m, double pk, int digits = 17) {
  const NumericMatrix num = evaluate(m, pk);
  std::ostringstream out;
  out << "row_type,col_type,value\n";
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const MatrixEntry& e : m.row(i)) {
      const auto j = static_cast<std::size_t>(e.col);
      out << m.space()[i].to_string() << ',' << m.space()[j].to_string() << ','
          << format_number(num.at(i, j), digits) << '\n';
    }
  return out.str();
}

struct CsvEntry {
  BranchType row;
  BranchType col;
  double value;
};

inline std::vector<CsvEntry> read_matrix_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "row_type,col_type,value")
    throw std::invalid_argument("matrix CSV must start with header row_type,col_type,value");
  std::vector<CsvEntry> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw std::invalid_argument("malformed matrix CSV line: " + line);
    std::size_t used = 0;
    const std::string num = line.substr(b + 1);
    double v = 0.0;
    try {
      v = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size()) throw std::invalid_argument("bad value in matrix CSV: " + line);
    out.push_back({BranchType::from_string(line.substr(0, a)),
                   BranchType::from_string(line.substr(a + 1, b - a - 1)), v});
  }
  return out;
}

}  // namespace mrperc
