#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = mrperc::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, ClosedFormThreshold) {
  const auto r = run({"threshold", "--d", "2", "--p", "0.25", "--k", "2", "--method", "closed-form"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["p_kc"].get<double>(), 0.135643, 5e-7);
  EXPECT_EQ(j["method"], "closed_form_k2");
  EXPECT_EQ(j["params"]["k"], 2);
}

TEST(Cli, K3Bisect) {
  const auto r = run({"threshold", "--d", "2", "--p", "0.25,0", "--k", "3", "--method", "bisect", "--tol", "1e-9"});
  ASSERT_EQ(r.code, 0) << r.err;
  // Root of det(I - M) for the seven-line k = 3 matrix.
  EXPECT_NEAR(json::parse(r.out)["p_kc"].get<double>(), 0.0640925080, 1e-8);
}

TEST(Cli, SupercriticalBaseIsSolverError) {
  const auto r = run({"threshold", "--d", "2", "--p", "0.6", "--k", "2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.out)["error"], "supercritical-base");
}

TEST(Cli, NoThresholdIsSolverErrorForPoly) {
  const auto r = run({"threshold", "--d", "2", "--p", "0.25", "--method", "poly"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(json::parse(r.out)["p_kc"].get<double>(), 0.135643, 5e-7);
  const auto big = run({"threshold", "--d", "2", "--p", "0,0,0,0,0,0,0,0,0,0", "--method", "poly"});
  EXPECT_EQ(big.code, 1);
  EXPECT_EQ(json::parse(big.out)["error"], "unsupported-degree");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"threshold", "--d", "2", "--p", "0.25", "--bogus", "1"}).code, 2);
  EXPECT_EQ(run({"threshold", "--d", "2", "--p", "0.25,x"}).code, 2);
  EXPECT_EQ(run({"threshold", "--d", "2", "--p", "0.25,"}).code, 2);
  EXPECT_EQ(run({"threshold", "--d", "2", "--p", "1.5"}).code, 2);
  EXPECT_EQ(run({"threshold", "--d", "2", "--p", "0.25", "--k", "3"}).code, 2);
  EXPECT_EQ(run({"threshold", "--d", "2", "--k", "30", "--p", std::string(57, ',')}).code, 2);
  EXPECT_EQ(run({"threshold", "--d", "2", "--p", "0.25", "--method", "newton"}).code, 2);
  EXPECT_EQ(run({"rho", "--d", "2", "--p", "0.25"}).code, 2);
  EXPECT_EQ(run({"simulate", "--d", "2", "--p", "0.25"}).code, 2);
  EXPECT_EQ(run({"matrix", "--d", "2", "--p", "0.25", "--format", "csv"}).code, 2);
  EXPECT_EQ(run({"matrix", "--d", "2", "--p", "0.25", "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"sweep", "--d", "2", "--p", "0.25", "--grid", "0:1"}).code, 2);
  EXPECT_EQ(run({"sweep", "--d", "2", "--p", "0.25", "--grid", "0:0.1:0.05", "--axis", "p2"}).code, 2);
  EXPECT_EQ(run({"threshold", "--d", "1", "--p", "0.25"}).code, 2);
}

TEST(Cli, HelpListsEveryFlag) {
  std::string all;
  for (const char* sub : {"matrix", "rho", "threshold", "charpoly", "sweep", "simulate"}) {
    const auto r = run({sub, "--help"});
    EXPECT_EQ(r.code, 0);
    all += r.out;
  }
  for (const char* flag : {"--d", "--k", "--p", "--pk", "--method", "--tol", "--grid", "--axis", "--generations",
                           "--replicas", "--seed", "--cap", "--out", "--format"})
    EXPECT_NE(all.find(flag), std::string::npos) << flag;
  const auto top = run({"--help"});
  EXPECT_EQ(top.code, 0);
  EXPECT_NE(top.out.find("simulate"), std::string::npos);
}

TEST(Cli, RerunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> cases = {
      {"threshold", "--d", "3", "--p", "0.1,0.02"},
      {"simulate", "--d", "2", "--p", "0.25", "--pk", "0.15", "--replicas", "2000", "--seed", "42"},
      {"sweep", "--d", "2", "--p", "0.25", "--grid", "0:0.3:0.1"},
      {"matrix", "--d", "2", "--p", "0.25,0"},
      {"charpoly", "--d", "2", "--p", "0.25"},
      {"rho", "--d", "2", "--p", "0.25", "--pk", "0.2"}};
  for (const auto& c : cases) {
    const auto a = run(c), b = run(c);
    EXPECT_EQ(a.code, 0) << c[0] << a.err;
    EXPECT_EQ(a.out, b.out) << c[0];
  }
}

TEST(Cli, CsvAndJsonCarrySameNumbers) {
  const std::vector<std::string> base = {"threshold", "--d", "3", "--p", "0.1,0.02"};
  auto csv_args = base;
  csv_args.insert(csv_args.end(), {"--format", "csv"});
  const auto j = json::parse(run(base).out);
  const auto rows = csv_rows(run(csv_args).out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"method", "p_kc", "lo", "hi", "rho_residual", "evaluations"}));
  EXPECT_EQ(std::stod(rows[1][1]), j["p_kc"].get<double>());
  EXPECT_EQ(std::stod(rows[1][2]), j["bracket"][0].get<double>());
  EXPECT_EQ(std::stod(rows[1][3]), j["bracket"][1].get<double>());
  EXPECT_EQ(std::stod(rows[1][4]), j["rho_residual"].get<double>());

  const std::vector<std::string> sim = {"simulate", "--d", "2", "--p", "0.25", "--pk", "0.16", "--replicas", "3000"};
  auto sim_csv = sim;
  sim_csv.insert(sim_csv.end(), {"--format", "csv"});
  const auto sj = json::parse(run(sim).out);
  const auto sr = csv_rows(run(sim_csv).out);
  EXPECT_EQ(std::stod(sr[1][0]), sj["p_hat"].get<double>());
  EXPECT_EQ(std::stod(sr[1][1]), sj["ci"][0].get<double>());
  EXPECT_EQ(std::stod(sr[1][2]), sj["ci"][1].get<double>());
}

TEST(Cli, SweepFormats) {
  const std::vector<std::string> base = {"sweep", "--d", "2", "--p", "0.25", "--grid", "0.3:0.6:0.1", "--axis", "p1"};
  auto csv_args = base;
  csv_args.insert(csv_args.end(), {"--format", "csv"});
  const auto j = json::parse(run(base).out);
  const auto rows = csv_rows(run(csv_args).out);
  ASSERT_EQ(j["rows"].size(), 4u);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"axis_value", "p_kc", "method", "residual"}));
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& jr = j["rows"][i];
    EXPECT_EQ(std::stod(rows[i + 1][0]), jr["axis_value"].get<double>());
    if (jr.contains("error")) {
      EXPECT_EQ(rows[i + 1][2], "error:" + jr["error"].get<std::string>());
    } else {
      EXPECT_EQ(std::stod(rows[i + 1][1]), jr["p_kc"].get<double>());
    }
  }
  // p1 = 0.5 and 0.6 are supercritical bases; the sweep continues past them.
  EXPECT_EQ(j["rows"][2]["error"], "supercritical-base");
  EXPECT_TRUE(j["rows"][1].contains("p_kc"));
}

TEST(Cli, MatrixDumps) {
  const auto j = json::parse(run({"matrix", "--d", "2", "--p", "0.25"}).out);
  EXPECT_EQ(j["entries"].size(), 5u);
  const auto rows = csv_rows(run({"matrix", "--d", "2", "--p", "0.25", "--pk", "0.1", "--format", "csv"}).out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"row_type", "col_type", "value"}));
  EXPECT_EQ(rows.size(), 6u);
}

TEST(Cli, RhoMatchesThreshold) {
  const auto t = json::parse(run({"threshold", "--d", "2", "--p", "0.25", "--method", "closed-form"}).out);
  const auto r = json::parse(
      run({"rho", "--d", "2", "--p", "0.25", "--pk", mrperc::cli::num(t["p_kc"].get<double>())}).out);
  EXPECT_NEAR(r["rho"].get<double>(), 1.0, 1e-9);
  EXPECT_TRUE(r["converged"].get<bool>());
}

TEST(Cli, OutWritesFile) {
  const auto path = std::filesystem::temp_directory_path() / "mrperc_cli_out.json";
  std::filesystem::remove(path);
  const auto r = run({"charpoly", "--d", "2", "--p", "0.25", "--out", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  const auto j = json::parse(ss.str());
  EXPECT_EQ(j["degree"], 2);
  EXPECT_NEAR(j["smallest_positive_root"].get<double>(), 0.135643, 5e-7);
  std::filesystem::remove(path);
}

TEST(Cli, GridParsing) {
  using mrperc::cli::parse_grid;
  EXPECT_EQ(parse_grid("0:0.3:0.1"), (std::vector<double>{0.0, 0.1, 0.2, 0.3}));
  EXPECT_TRUE(parse_grid("0.5:0.1:0.1").empty());
  EXPECT_EQ(parse_grid("2:10:4"), (std::vector<double>{2, 6, 10}));
  EXPECT_THROW(parse_grid("0:1:0"), std::invalid_argument);
  EXPECT_THROW(parse_grid("a:1:0.1"), std::invalid_argument);
}
