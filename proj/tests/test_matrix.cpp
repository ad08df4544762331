#include <gtest/gtest.h>

#include <map>
#include <random>
#include <string>

#include "mrperc/matrix.hpp"
#include "mrperc/matrix_io.hpp"

using namespace mrperc;

namespace {

using Cells = std::map<std::pair<std::string, std::string>, double>;

/// Evaluated matrix keyed by (row type, column type), zero entries skipped.
Cells cells(const MeanMatrix& m, double pk) {
  Cells out;
  evaluate(m, pk).for_each([&](std::size_t i, std::size_t j, double v) {
    out[{m.space()[i].to_string(), m.space()[j].to_string()}] = v;
  });
  return out;
}

void expect_cells(const Cells& got, const Cells& want, double tol) {
  Cells nonzero;
  for (const auto& [key, v] : want)
    if (v != 0.0) nonzero[key] = v;
  ASSERT_EQ(got.size(), nonzero.size());
  for (const auto& [key, v] : nonzero) {
    auto it = got.find(key);
    ASSERT_NE(it, got.end()) << key.first << " -> " << key.second;
    EXPECT_NEAR(it->second, v, tol) << key.first << " -> " << key.second;
  }
}

Cells k2_table(double d, double p1, double p2) {
  return {{{"11", "11"}, d * (p1 + p2 - p1 * p2)},
          {{"11", "10"}, d * (1 - p1) * (1 - p2)},
          {{"10", "01"}, d * p2},
          {{"01", "11"}, d * p1},
          {{"01", "10"}, d * (1 - p1)}};
}

Cells k3_table(double d, double p1, double p3) {
  return {{{"110", "100"}, d * (1 - p3)},
          {{"110", "101"}, d * p3},
          {{"100", "001"}, d * p3},
          {{"111", "110"}, d * (1 - p1) * (1 - p3)},
          {{"111", "111"}, d * (p1 + p3 - p1 * p3)},
          {{"101", "011"}, d * (p1 + p3 - p1 * p3)},
          {{"101", "010"}, d * (1 - p1) * (1 - p3)},
          {{"011", "110"}, d * (1 - p1)},
          {{"011", "111"}, d * p1},
          {{"001", "011"}, d * p1},
          {{"001", "010"}, d * (1 - p1)},
          {{"010", "100"}, d}};
}

}  // namespace

TEST(MeanMatrix, GoldenK2Table) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const int d = 2 + static_cast<int>(rng() % 5);
    const double p1 = u(rng), pk = u(rng);
    const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(d, {p1}));
    expect_cells(cells(m, pk), k2_table(d, p1, pk), 1e-12);
  }
}

TEST(MeanMatrix, GoldenK3WithP2Zero) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const int d = 2 + static_cast<int>(rng() % 5);
    const double p1 = u(rng), pk = u(rng);
    const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(d, {p1, 0.0}));
    expect_cells(cells(m, pk), k3_table(d, p1, pk), 1e-12);
  }
}

TEST(MeanMatrix, K1IsScalarAffine) {
  const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(3, {}));
  ASSERT_EQ(m.size(), 1u);
  ASSERT_EQ(m.row(0).size(), 1u);
  EXPECT_EQ(m.row(0)[0].value, (AffineEntry{0.0, 3.0}));
}

TEST(MeanMatrix, RowsStartingWithZeroAreConstant) {
  const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(3, {0.1, 0.3, 0.0, 0.2}));
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_LE(m.row(i).size(), 2u);
    if (!m.space()[i].bit(1))
      for (const auto& e : m.row(i)) {
        EXPECT_EQ(e.value.c1, 0.0);
      }
  }
}

// (1,1) has both successors, so its row sums to d.
TEST(Evaluate, RowSumsAtPkZero) {
  const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(2, {0.25}));
  const NumericMatrix a = evaluate(m, 0.0);
  const auto& s = m.space();
  EXPECT_DOUBLE_EQ(a.row_sum(static_cast<std::size_t>(s.index_of(BranchType::from_string("11")))), 2.0);
  EXPECT_DOUBLE_EQ(a.row_sum(static_cast<std::size_t>(s.index_of(BranchType::from_string("10")))), 0.0);
  EXPECT_DOUBLE_EQ(a.row_sum(static_cast<std::size_t>(s.index_of(BranchType::from_string("01")))), 2.0);
}

TEST(Evaluate, K3RowOneOneZero) {
  const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(2, {0.25, 0.0}));
  const auto c = cells(m, 0.1);
  EXPECT_DOUBLE_EQ(c.at({"110", "100"}), 2 * 0.9);
  EXPECT_DOUBLE_EQ(c.at({"110", "101"}), 2 * 0.1);
}

TEST(Evaluate, RejectsPkOutsideUnitInterval) {
  const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(2, {0.25}));
  EXPECT_THROW(evaluate(m, -0.1), std::invalid_argument);
  EXPECT_THROW(evaluate(m, 1.5), std::invalid_argument);
}

// Row sums, affinity, monotonicity and bounds on random models.
TEST(Evaluate, StructuralProperties) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 6);
    const int d = 2 + static_cast<int>(rng() % 4);
    std::vector<double> fixed;
    for (int l = 1; l < k; ++l) fixed.push_back(rng() % 4 == 0 ? 0.0 : 0.9 * u(rng));
    const ModelParams params = ModelParams::with_fixed(d, fixed);
    const MeanMatrix m = build_mean_matrix(params);
    EXPECT_LE(m.stored_entries(), 2 * m.size());

    const double alpha = u(rng), beta = u(rng);
    const NumericMatrix a = evaluate(m, alpha), b = evaluate(m, beta), mid = evaluate(m, 0.5 * (alpha + beta));
    const auto da = a.to_dense(), db = b.to_dense(), dm = mid.to_dense();
    for (std::size_t i = 0; i < da.size(); ++i) EXPECT_NEAR(da[i] + db[i], 2.0 * dm[i], 1e-12);

    const std::uint32_t lead = std::uint32_t{1} << (k - 1);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const BranchType t = m.space()[i];
      double expected = d;
      if (t.code() == lead) expected = d * occupation_probability(t, params.with_pk(alpha));
      // Entries to successors outside the class are not stored; none occur here.
      EXPECT_NEAR(a.row_sum(i), expected, 1e-12) << t.to_string();
      for (const auto& e : m.row(i)) {
        const bool to_one = m.space()[static_cast<std::size_t>(e.col)].bit(k);
        const double lo = e.value.at(std::min(alpha, beta)), hi = e.value.at(std::max(alpha, beta));
        if (to_one) EXPECT_LE(lo, hi + 1e-15);
        else EXPECT_GE(lo, hi - 1e-15);
        EXPECT_GE(e.value.at(0.0), -1e-15);
        EXPECT_LE(e.value.at(1.0), d + 1e-12);
      }
    }
  }
}

TEST(MatrixIo, K2SymbolicDumpMatchesTable) {
  const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(2, {0.25}));
  const auto j = to_json(m);
  EXPECT_EQ(j["types"], nlohmann::json({"01", "10", "11"}));
  // The table has five nonzero cells.
  ASSERT_EQ(j["entries"].size(), 5u);
  const auto& e = j["entries"];
  EXPECT_EQ(e[0], nlohmann::json({{"row", 0}, {"col", 1}, {"c0", 1.5}, {"c1", 0.0}}));
  EXPECT_EQ(e[1], nlohmann::json({{"row", 0}, {"col", 2}, {"c0", 0.5}, {"c1", 0.0}}));
  EXPECT_EQ(e[2], nlohmann::json({{"row", 1}, {"col", 0}, {"c0", 0.0}, {"c1", 2.0}}));
  EXPECT_EQ(e[3], nlohmann::json({{"row", 2}, {"col", 1}, {"c0", 1.5}, {"c1", -1.5}}));
  EXPECT_EQ(e[4], nlohmann::json({{"row", 2}, {"col", 2}, {"c0", 0.5}, {"c1", 1.5}}));
}

TEST(MatrixIo, K1Dump) {
  const auto j = to_json(build_mean_matrix(ModelParams::with_fixed(4, {})));
  EXPECT_EQ(j.dump(), R"({"d":4,"entries":[{"c0":0.0,"c1":4.0,"col":0,"row":0}],"k":1,"p":[],"types":["1"]})");
}

TEST(MatrixIo, K3DumpHasTwelveEntries) {
  const auto j = to_json(build_mean_matrix(ModelParams::with_fixed(2, {0.25, 0.0})));
  EXPECT_EQ(j["entries"].size(), 12u);
}

TEST(MatrixIo, JsonRoundTripIsExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 6);
    std::vector<double> fixed;
    for (int l = 1; l < k; ++l) fixed.push_back(u(rng) * 0.5);
    const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(2 + trial % 3, fixed));
    const auto text = to_json(m).dump();
    const MeanMatrix back = mean_matrix_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(to_json(back).dump(), text);
    ASSERT_EQ(back.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) EXPECT_EQ(back.entry(i, j), m.entry(i, j));
  }
}

TEST(MatrixIo, CsvRoundTrip) {
  const MeanMatrix m = build_mean_matrix(ModelParams::with_fixed(2, {0.25, 0.0}));
  const auto rows = read_matrix_csv(to_csv(m, 0.3));
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) {
    const auto i = static_cast<std::size_t>(m.space().index_of(r.row));
    const auto j = static_cast<std::size_t>(m.space().index_of(r.col));
    EXPECT_EQ(r.value, m.entry(i, j).at(0.3));
  }
}

TEST(MatrixIo, ReaderRejectsMalformedInput) {
  EXPECT_THROW(mean_matrix_from_json(nlohmann::json::parse(R"({"d":2})")), std::invalid_argument);
  EXPECT_THROW(mean_matrix_from_json(nlohmann::json::parse(
                   R"({"d":2,"k":2,"p":[0.1],"types":["01"],"entries":[{"row":0,"col":3,"c0":0,"c1":0}]})")),
               std::invalid_argument);
  EXPECT_THROW(read_matrix_csv("a,b\n"), std::invalid_argument);
  EXPECT_THROW(read_matrix_csv("row_type,col_type,value\n01,10,abc\n"), std::invalid_argument);
}
