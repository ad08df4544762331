#pragma once

// Command-line front end. Kept in a header so the test suite can drive it
// without spawning processes.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrperc/mrperc.hpp"

namespace mrperc::cli {

using nlohmann::json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_solver = 1;
inline constexpr int exit_usage = 2;

/// Rounds to 12 significant digits for output.
inline double sig12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  return std::stod(format_number(v, 12));
}

inline std::string num(double v) { return format_number(v, 12); }

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("malformed probability list: " + text);
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("probability outside [0, 1]: " + item);
    out.push_back(v);
  }
  if (!text.empty() && text.back() == ',') throw std::invalid_argument("malformed probability list: " + text);
  return out;
}

/// `a:b:step`, inclusive of b up to rounding.
inline std::vector<double> parse_grid(const std::string& text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string::npos) throw std::invalid_argument("grid must be a:b:step");
  double a = 0, b = 0, step = 0;
  try {
    a = std::stod(text.substr(0, c1));
    b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    step = std::stod(text.substr(c2 + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("grid must be a:b:step");
  }
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  std::vector<double> grid;
  if (b < a) return grid;
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) grid.push_back(sig12(a + static_cast<double>(i) * step));
  return grid;
}

struct Options {
  int d = 2;
  std::optional<int> k;
  std::string p;
  std::optional<double> pk;
  std::string method = "bisect";
  double tol = 1e-9;
  std::string grid;
  std::string axis = "p1";
  int generations = 60;
  long replicas = 100'000;
  std::uint64_t seed = 0;
  std::uint64_t cap = 10'000'000;
  std::string out;
  std::string format = "json";
};

/// Parameters from --d/--k/--p: --p lists the k-1 fixed probabilities and
/// k defaults to its length plus one. p_k comes from --pk (0 if absent).
inline ModelParams model_from(const Options& o) {
  std::vector<double> fixed = parse_list(o.p);
  if (o.k) {
    if (*o.k < 1 || *o.k > max_range)
      throw std::invalid_argument("k out of supported range [1, " + std::to_string(max_range) + "]");
    if (fixed.size() != static_cast<std::size_t>(*o.k - 1))
      throw std::invalid_argument("--p must list k-1 = " + std::to_string(*o.k - 1) + " probabilities");
  }
  if (fixed.size() + 1 > static_cast<std::size_t>(max_range))
    throw std::invalid_argument("k out of supported range");
  return ModelParams::with_fixed(o.d, std::move(fixed), o.pk.value_or(0.0));
}

inline json params_json(const ModelParams& m) {
  json p = json::array();
  for (double v : m.p) p.push_back(sig12(v));
  return {{"d", m.d}, {"k", m.k}, {"p", p}};
}

inline Method parse_method(const std::string& s) {
  if (s == "bisect") return Method::bisect;
  if (s == "poly" || s == "charpoly") return Method::charpoly;
  if (s == "closed-form") return Method::closed_form_k2;
  throw std::invalid_argument("unknown method: " + s);
}

inline json threshold_json(const ThresholdResult& r) {
  return {{"method", std::string(to_string(r.method))},
          {"p_kc", sig12(r.p_kc)},
          {"bracket", {sig12(r.lo), sig12(r.hi)}},
          {"rho_residual", sig12(r.rho_residual)},
          {"evaluations", r.evaluations},
          {"params", params_json(r.params)}};
}

/// Header plus one row of the given scalar fields.
inline std::string record_csv(const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string head, row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    head += (i ? "," : "") + fields[i].first;
    row += (i ? "," : "") + fields[i].second;
  }
  return head + "\n" + row + "\n";
}

inline std::string run_matrix(const Options& o) {
  const ModelParams params = model_from(o);
  const MeanMatrix m = build_mean_matrix(params);
  if (o.format == "csv") {
    if (!o.pk) throw std::invalid_argument("--pk is required for a numeric CSV dump");
    return to_csv(m, *o.pk, 12);
  }
  return to_json(m).dump() + "\n";
}

inline std::string run_rho(const Options& o) {
  if (!o.pk) throw std::invalid_argument("--pk is required for rho");
  const ModelParams params = model_from(o);
  const MeanMatrix m = build_mean_matrix(params);
  const SpectralResult r = perron_root(evaluate(m, *o.pk), std::min(o.tol, 1e-12));
  if (o.format == "csv")
    return record_csv({{"rho", num(r.rho)},
                       {"lower", num(r.lower)},
                       {"upper", num(r.upper)},
                       {"residual", num(r.residual)},
                       {"iterations", std::to_string(r.iterations)},
                       {"converged", r.converged ? "true" : "false"}});
  return json{{"rho", sig12(r.rho)},         {"lower", sig12(r.lower)},
              {"upper", sig12(r.upper)},     {"residual", sig12(r.residual)},
              {"iterations", r.iterations},  {"converged", r.converged},
              {"params", params_json(params)}}
             .dump() +
         "\n";
}

inline std::string run_threshold(const Options& o) {
  const ThresholdResult r = solve_threshold(model_from(o), parse_method(o.method), o.tol);
  if (o.format == "csv")
    return record_csv({{"method", std::string(to_string(r.method))},
                       {"p_kc", num(r.p_kc)},
                       {"lo", num(r.lo)},
                       {"hi", num(r.hi)},
                       {"rho_residual", num(r.rho_residual)},
                       {"evaluations", std::to_string(r.evaluations)}});
  return threshold_json(r).dump() + "\n";
}

inline std::string run_charpoly(const Options& o) {
  const ModelParams params = model_from(o);
  const CharPoly cp = charpoly(params);
  const double root = smallest_positive_root(cp);
  if (o.format == "csv") {
    std::string s = "key,value\n";
    s += "degree," + std::to_string(cp.degree) + "\n";
    s += "smallest_positive_root," + num(root) + "\n";
    s += "domain," + num(cp.domain) + "\n";
    s += "log_scale," + num(cp.log_scale) + "\n";
    s += "validation_residual," + num(cp.validation_residual) + "\n";
    for (std::size_t i = 0; i < cp.coefficients.size(); ++i)
      s += "c" + std::to_string(i) + "," + num(cp.coefficients[i]) + "\n";
    return s;
  }
  json coeffs = json::array();
  for (double c : cp.coefficients) coeffs.push_back(sig12(c));
  return json{{"degree", cp.degree},
              {"smallest_positive_root", sig12(root)},
              {"domain", sig12(cp.domain)},
              {"log_scale", sig12(cp.log_scale)},
              {"validation_residual", sig12(cp.validation_residual)},
              {"coefficients", coeffs},
              {"params", params_json(params)}}
             .dump() +
         "\n";
}

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "d") return SweepAxis::degree();
  if (s.size() >= 2 && s[0] == 'p') {
    try {
      std::size_t used = 0;
      const int j = std::stoi(s.substr(1), &used);
      if (used == s.size() - 1) return SweepAxis::probability(j);
    } catch (const std::exception&) {
    }
  }
  throw std::invalid_argument("axis must be pj (1 <= j < k) or d");
}

inline std::string run_sweep(const Options& o) {
  const ModelParams base = model_from(o);
  const auto rows = sweep(base, parse_axis(o.axis), parse_grid(o.grid), parse_method(o.method), o.tol);
  if (o.format == "csv") {
    std::string s = "axis_value,p_kc,method,residual\n";
    for (const SweepRow& r : rows) {
      s += num(r.axis_value) + ",";
      if (r.result)
        s += num(r.result->p_kc) + "," + std::string(to_string(r.result->method)) + "," + num(r.result->rho_residual);
      else
        s += ",error:" + r.error + ",";
      s += "\n";
    }
    return s;
  }
  json arr = json::array();
  for (const SweepRow& r : rows) {
    json row{{"axis_value", sig12(r.axis_value)}};
    if (r.result) {
      row["p_kc"] = sig12(r.result->p_kc);
      row["method"] = std::string(to_string(r.result->method));
      row["residual"] = sig12(r.result->rho_residual);
    } else {
      row["error"] = r.error;
    }
    arr.push_back(row);
  }
  return json{{"axis", o.axis}, {"rows", arr}}.dump() + "\n";
}

inline std::string run_simulate(const Options& o) {
  if (!o.pk) throw std::invalid_argument("--pk is required for simulate");
  SimConfig cfg;
  cfg.params = model_from(o);
  cfg.generations = o.generations;
  cfg.replicas = o.replicas;
  cfg.seed = o.seed;
  cfg.population_cap = o.cap;
  const SurvivalEstimate e = estimate_survival(cfg);
  if (o.format == "csv")
    return record_csv({{"p_hat", num(e.p_hat)},
                       {"ci_low", num(e.ci_low)},
                       {"ci_high", num(e.ci_high)},
                       {"replicas", std::to_string(e.replicas)},
                       {"generations", std::to_string(e.generations)},
                       {"capped_fraction", num(e.capped_fraction)}});
  return json{{"p_hat", sig12(e.p_hat)},
              {"ci", {sig12(e.ci_low), sig12(e.ci_high)}},
              {"replicas", e.replicas},
              {"generations", e.generations},
              {"capped_fraction", sig12(e.capped_fraction)}}
             .dump() +
         "\n";
}

/// Runs the tool. Results go to `out` (or --out); usage errors to `err`.
/// Exit codes: 0 success, 1 solver error, 2 usage error.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Critical points of multi-range oriented percolation on d-ary trees", "mrperc"};
  app.require_subcommand(1);
  Options o;

  auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--d", o.d, "tree degree (>= 2)")->capture_default_str();
    sub->add_option("--k", o.k, "maximum range; defaults to 1 + length of --p");
    sub->add_option("--p", o.p, "comma list of the fixed probabilities p_1..p_{k-1}");
    sub->add_option("--out", o.out, "write the result to this file instead of stdout");
    sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  };
  auto method_flags = [&](CLI::App* sub) {
    sub->add_option("--method", o.method, "solver")
        ->check(CLI::IsMember({"bisect", "poly", "closed-form"}))
        ->capture_default_str();
    sub->add_option("--tol", o.tol, "bisection bracket width")->capture_default_str();
  };

  auto* matrix = app.add_subcommand("matrix", "dump the mean matrix (symbolic JSON or numeric CSV at --pk)");
  model_flags(matrix);
  matrix->add_option("--pk", o.pk, "value of p_k for the numeric dump");

  auto* rho = app.add_subcommand("rho", "Perron root of M at --pk");
  model_flags(rho);
  rho->add_option("--pk", o.pk, "value of p_k")->required();
  rho->add_option("--tol", o.tol, "Collatz-Wielandt half-width (capped at 1e-12)");

  auto* threshold = app.add_subcommand("threshold", "critical value of p_k");
  model_flags(threshold);
  method_flags(threshold);

  auto* poly = app.add_subcommand("charpoly", "characteristic polynomial det(I - M(p_k))");
  model_flags(poly);

  auto* sw = app.add_subcommand("sweep", "thresholds over a grid of one parameter");
  model_flags(sw);
  method_flags(sw);
  sw->add_option("--grid", o.grid, "grid a:b:step (inclusive)")->required();
  sw->add_option("--axis", o.axis, "varied parameter: pj or d")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo survival estimate");
  model_flags(sim);
  sim->add_option("--pk", o.pk, "value of p_k")->required();
  sim->add_option("--generations", o.generations, "horizon N")->capture_default_str();
  sim->add_option("--replicas", o.replicas, "number of replicas R")->capture_default_str();
  sim->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
  sim->add_option("--cap", o.cap, "population cap C counted as survival")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }

  std::string text;
  try {
    if (matrix->parsed()) text = run_matrix(o);
    else if (rho->parsed()) text = run_rho(o);
    else if (threshold->parsed()) text = run_threshold(o);
    else if (poly->parsed()) text = run_charpoly(o);
    else if (sw->parsed()) text = run_sweep(o);
    else text = run_simulate(o);
  } catch (const SolverError& e) {
    out << json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << "\n";
    return exit_solver;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }

  if (o.out.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
      err << "error: cannot open " << o.out << "\n";
      return exit_usage;
    }
    f << text;
  }
  return exit_ok;
}

}  // namespace mrperc::cli
