#pragma once

// Command-line front end. Every command builds a Report that knows how to
// render itself as a human-readable table, JSON, or CSV; dispatch() picks
// the rendering from --json / --out and maps failures onto exit codes:
// 0 success, 2 invalid arguments, 3 solver non-convergence.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "altseq/finite_dp.hpp"
#include "altseq/geometric_dp.hpp"
#include "altseq/montecarlo.hpp"
#include "altseq/policies.hpp"
#include "altseq/sequence.hpp"

namespace altseq::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoConvergence = 3;

// The finite-horizon tables hold (n + 1) * M values; compare caps n here.
inline constexpr std::size_t kCompareFiniteCap = 1000;

/// Invalid flag value or combination; the message starts with the flag.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& flag, const std::string& what) : std::runtime_error(flag + ": " + what) {}
};

/// Rounds to 9 significant digits so that printed JSON is stable.
inline double round9(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

/// Recursively applies round9 to every floating-point number.
inline json rounded(json j) {
  if (j.is_number_float()) return round9(j.get<double>());
  if (j.is_structured()) {
    for (auto& item : j) item = rounded(item);
  }
  return j;
}

inline std::string render_json(const json& j) { return rounded(j).dump(2) + "\n"; }

struct Options {
  std::string command;
  double rho = 0.0;
  double xi = 0.0;
  double tol = kDefaultTolerance;
  std::size_t n = 0;
  std::size_t grid = kDefaultGridSize;
  std::size_t reps = 100000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::string policy;
  std::string out;
  std::string dump_tables;
  bool json = false;
  bool has_rho = false, has_xi = false, has_n = false;
};

struct Report {
  json data;                   // includes "config"
  std::string human;           // already formatted
  std::vector<std::string> csv;  // lines, header first
};

enum class Format { human, json, csv };

inline Format output_format(const Options& o) {
  if (o.out.empty()) return o.json ? Format::json : Format::human;
  const auto dot = o.out.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : o.out.substr(dot);
  if (ext == ".json") return Format::json;
  if (ext == ".csv") return Format::csv;
  throw UsageError("--out", "file name must end in .json or .csv, got '" + o.out + "'");
}

// ---------------------------------------------------------------- validation

inline void validate(const Options& o) {
  if (o.has_rho && !(o.rho > 0.0 && o.rho < 1.0)) throw UsageError("--rho", "must lie in (0, 1), got " + fmt(o.rho));
  if (o.has_xi && !(o.xi >= 0.0 && o.xi <= 0.5)) throw UsageError("--xi", "must lie in [0, 1/2], got " + fmt(o.xi));
  if (o.has_n && o.n < 1) throw UsageError("--n", "must be >= 1");
  if (o.grid < 3) throw UsageError("--grid", "must be >= 3, got " + std::to_string(o.grid));
  if (!(o.tol > 0.0)) throw UsageError("--tol", "must be positive, got " + fmt(o.tol));
  if (o.reps < 1) throw UsageError("--reps", "must be >= 1");
  output_format(o);
}

// ------------------------------------------------------------ shared pieces

inline json simulation_row(const std::string& policy, const HorizonSpec& horizon, const RunResult& r,
                           std::uint64_t seed) {
  json row;
  row["policy"] = policy;
  row["reps"] = r.reps;
  row["seed"] = seed;
  row["mean"] = r.mean;
  row["variance"] = r.variance;
  row["std_error"] = r.std_error;
  if (const auto* f = std::get_if<FixedHorizon>(&horizon)) {
    row["horizon_kind"] = "fixed";
    row["horizon_param"] = f->n;
    row["rate"] = r.mean / static_cast<double>(f->n);
  } else {
    const double rho = std::get<GeometricHorizon>(horizon).rho;
    row["horizon_kind"] = "geometric";
    row["horizon_param"] = rho;
    row["rate"] = r.mean * (1.0 - rho);
    row["horizon_mean"] = r.horizon_mean;
    row["horizon_std_error"] = r.horizon_std_error;
  }
  if (r.regenerations) {
    row["regenerations"] = {{"count", r.regenerations->count}, {"mean_wait", r.regenerations->mean_wait}};
  }
  return row;
}

inline const char* kSimulationHeader = "policy,horizon_kind,horizon_param,reps,seed,mean,variance,std_error,rate";

inline std::string csv_value(const json& v) {
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline std::string simulation_csv_line(const json& row) {
  std::string line;
  for (const char* key : {"policy", "horizon_kind", "horizon_param", "reps", "seed", "mean", "variance", "std_error",
                          "rate"}) {
    if (!line.empty()) line += ',';
    line += csv_value(row.at(key));
  }
  return line;
}

inline std::string simulation_table(const json& rows) {
  std::string s;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %-10s %12s %8s %14s %12s %12s\n", "policy", "horizon", "param", "reps",
                "mean", "std_error", "rate");
  s += buf;
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%-18s %-10s %12s %8s %14s %12s %12s\n",
                  row.at("policy").get<std::string>().c_str(), row.at("horizon_kind").get<std::string>().c_str(),
                  csv_value(row.at("horizon_param")).c_str(), csv_value(row.at("reps")).c_str(),
                  fmt(row.at("mean").get<double>()).c_str(), fmt(row.at("std_error").get<double>()).c_str(),
                  fmt(row.at("rate").get<double>()).c_str());
    s += buf;
  }
  return s;
}

inline std::string key_value_table(const json& data, const std::vector<std::string>& keys) {
  std::string s;
  char buf[256];
  for (const auto& k : keys) {
    if (!data.contains(k)) continue;
    std::snprintf(buf, sizeof buf, "%-16s %s\n", k.c_str(), csv_value(data.at(k)).c_str());
    s += buf;
  }
  return s;
}

// ----------------------------------------------------------------- commands

inline Report run_geometric(const Options& o) {
  const DiscountFactor rho(o.rho);
  const ValueFunctionGrid v = solve_flipped(rho, o.grid, o.tol);
  const ClosedFormGeometric cf = closed_form(rho);

  Report rep;
  json& d = rep.data;
  d["config"] = {{"command", "geometric"}, {"rho", o.rho}, {"grid", o.grid}, {"tol", o.tol}};
  d["rho"] = o.rho;
  d["xi0_closed"] = cf.xi0;
  d["xi0_raw"] = cf.xi0_raw;
  d["xi0_numeric"] = extract_threshold(v, rho);
  d["value_closed"] = cf.value;
  d["value_formula"] = cf.value_formula;
  d["value_xi_zero"] = cf.value_xi_zero;
  d["value_numeric"] = v.values.front();
  d["residual"] = v.residual;
  d["iterations"] = v.iterations;
  d["regime"] = cf.clamped ? "clamped" : "interior";
  if (cf.clamped) {
    d["note"] =
        "rho < 2 - sqrt(2): the threshold formula is negative and is clamped to 0. Two candidate closed forms "
        "are reported: value_xi_zero (value of the threshold-0 policy) and value_formula (the unclamped "
        "expression); compare each with value_numeric.";
  }

  rep.human = "config: " + rounded(d["config"]).dump() + "\n" +
              key_value_table(d, {"rho", "regime", "xi0_closed", "xi0_raw", "xi0_numeric", "value_closed",
                                  "value_formula", "value_xi_zero", "value_numeric", "residual", "iterations"});
  if (cf.clamped) rep.human += "note: " + d["note"].get<std::string>() + "\n";

  const std::vector<std::string> cols = {"rho", "regime", "xi0_closed", "xi0_raw", "xi0_numeric", "value_closed",
                                         "value_formula", "value_xi_zero", "value_numeric", "residual",
                                         "iterations"};
  std::string header, line;
  for (const auto& c : cols) {
    header += (header.empty() ? "" : ",") + c;
    line += (line.empty() ? "" : ",") + csv_value(d[c]);
  }
  rep.csv = {"# config: " + rounded(d["config"]).dump(), header, line};
  return rep;
}

inline void dump_tables(const FiniteSolution& sol, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw UsageError("--dump-tables", "cannot open '" + path + "' for writing");
  f << "stage,y,value,threshold\n";
  const auto& grid = sol.grid();
  for (std::size_t i = 1; i <= sol.horizon(); ++i) {
    const auto v = sol.value_row(i);
    const auto t = sol.threshold_row(i);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      f << i << ',' << fmt(grid.node(j)) << ',' << fmt(v[j]) << ',' << fmt(t[j]) << '\n';
    }
  }
  if (!f) throw UsageError("--dump-tables", "write to '" + path + "' failed");
}

inline Report run_finite(const Options& o) {
  const FiniteSolution sol = solve_finite(Horizon(o.n), o.grid);
  const double value = sol.value_row(1)[0];
  const double rate = 2.0 - std::sqrt(2.0);
  const double lo = rate * static_cast<double>(o.n);
  const double hi = lo + 11.0 - 4.0 * std::sqrt(2.0);
  const bool inside = value >= lo && value <= hi;
  if (!o.dump_tables.empty()) dump_tables(sol, o.dump_tables);

  Report rep;
  json& d = rep.data;
  d["config"] = {{"command", "finite"}, {"n", o.n}, {"grid", o.grid}, {"dump_tables", o.dump_tables}};
  d["n"] = o.n;
  d["grid"] = o.grid;
  d["value"] = value;
  d["bracket_lo"] = lo;
  d["bracket_hi"] = hi;
  d["verdict"] = inside ? "IN" : "OUT";

  rep.human = "config: " + rounded(d["config"]).dump() + "\n" + "v_{1," + std::to_string(o.n) +
              "}(0) = " + fmt(value) + "  bracket [" + fmt(lo) + ", " + fmt(hi) + "]  " + (inside ? "IN" : "OUT") +
              "\n";
  rep.csv = {"# config: " + rounded(d["config"]).dump(), "n,grid,value,bracket_lo,bracket_hi,verdict",
             std::to_string(o.n) + "," + std::to_string(o.grid) + "," + fmt(value) + "," + fmt(lo) + "," + fmt(hi) +
                 "," + (inside ? "IN" : "OUT")};
  return rep;
}

inline Report run_offline_command(const Options& o) {
  const RunResult r = run_offline(Horizon(o.n), o.reps, o.seed, o.threads);
  Report rep;
  json& d = rep.data;
  d["config"] = {{"command", "offline"}, {"n", o.n}, {"reps", o.reps}, {"seed", o.seed}, {"threads", o.threads}};
  json row = simulation_row("offline", FixedHorizon{o.n}, r, o.seed);
  for (auto it = row.begin(); it != row.end(); ++it) d[it.key()] = it.value();
  if (o.n >= 4) {
    const Moments m = permutation_moments(static_cast<long long>(o.n));
    d["mean_formula"] = m.mean;
    d["variance_formula"] = m.variance;
  }
  rep.human = "config: " + rounded(d["config"]).dump() + "\n" +
              key_value_table(d, {"n", "reps", "seed", "mean", "variance", "std_error", "rate", "mean_formula",
                                  "variance_formula"});
  rep.csv = {"# config: " + rounded(d["config"]).dump(), kSimulationHeader, simulation_csv_line(row)};
  return rep;
}

struct PlannedSimulation {
  SimulationConfig cfg;
  json config;
};

inline PlannedSimulation plan_simulation(const Options& o) {
  const std::string& p = o.policy;
  PlannedSimulation plan;
  SimulationConfig& cfg = plan.cfg;
  cfg.reps = o.reps;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  json& c = plan.config;
  c = {{"command", "simulate"}, {"policy", p}, {"reps", o.reps}, {"seed", o.seed}, {"threads", o.threads}};

  if (o.has_xi && p != "threshold") throw UsageError("--xi", "only applies to --policy threshold");
  auto horizon_from_flags = [&] {
    if (o.has_n == o.has_rho) throw UsageError("--n/--rho", "policy " + p + " needs exactly one of --n or --rho");
    if (o.has_n) {
      cfg.horizon = FixedHorizon{o.n};
      c["n"] = o.n;
    } else {
      cfg.horizon = GeometricHorizon{o.rho};
      c["rho"] = o.rho;
    }
  };

  if (p == "greedy" || p == "timid") {
    cfg.policy = p == "greedy" ? PolicySpec::greedy() : PolicySpec::timid();
    horizon_from_flags();
  } else if (p == "threshold") {
    if (!o.has_xi) throw UsageError("--xi", "required for --policy threshold");
    cfg.policy = PolicySpec::fixed(o.xi);
    c["xi"] = o.xi;
    horizon_from_flags();
  } else if (p == "geometric-optimal") {
    if (!o.has_rho) throw UsageError("--rho", "required for --policy geometric-optimal");
    if (o.has_n) throw UsageError("--n", "not used by --policy geometric-optimal (the horizon is geometric)");
    cfg.policy = PolicySpec::geometric(o.rho);
    cfg.horizon = GeometricHorizon{o.rho};
    c["rho"] = o.rho;
  } else if (p == "finite-optimal") {
    if (!o.has_n) throw UsageError("--n", "required for --policy finite-optimal");
    if (o.has_rho) throw UsageError("--rho", "finite-optimal runs on a fixed horizon; drop --rho");
    cfg.policy = PolicySpec::finite_optimal(std::make_shared<const FiniteSolution>(solve_finite(Horizon(o.n), o.grid)));
    cfg.horizon = FixedHorizon{o.n};
    c["n"] = o.n;
    c["grid"] = o.grid;
  } else if (p == "concat") {
    if (!o.has_n) throw UsageError("--n", "required for --policy concat (finite solution size, >= 3)");
    if (o.n < 3) throw UsageError("--n", "must be >= 3 for --policy concat");
    if (!o.has_rho) throw UsageError("--rho", "required for --policy concat (geometric horizon)");
    cfg.policy = PolicySpec::concatenated(std::make_shared<const FiniteSolution>(solve_finite(Horizon(o.n), o.grid)));
    cfg.horizon = GeometricHorizon{o.rho};
    c["n"] = o.n;
    c["rho"] = o.rho;
    c["grid"] = o.grid;
  } else {
    throw UsageError("--policy", "unknown policy '" + p + "'");
  }
  return plan;
}

inline Report run_simulate(const Options& o) {
  const PlannedSimulation plan = plan_simulation(o);
  const RunResult r = run(plan.cfg);
  Report rep;
  const json row = simulation_row(o.policy, plan.cfg.horizon, r, o.seed);
  rep.data = row;
  rep.data["config"] = plan.config;
  rep.human = "config: " + rounded(plan.config).dump() + "\n" + simulation_table(json::array({row}));
  if (r.regenerations) {
    rep.human += "regenerations " + std::to_string(r.regenerations->count) + ", mean wait " +
                 fmt(r.regenerations->mean_wait) + "\n";
  }
  rep.csv = {"# config: " + rounded(plan.config).dump(), kSimulationHeader, simulation_csv_line(row)};
  return rep;
}

inline Report run_compare(const Options& o) {
  Report rep;
  json& d = rep.data;
  d["config"] = {{"command", "compare"}, {"n", o.n},         {"reps", o.reps}, {"seed", o.seed},
                 {"grid", o.grid},       {"xi", kBestStationaryThreshold}, {"threads", o.threads}};
  json rows = json::array();
  json notes = json::array();

  auto simulate = [&](const std::string& name, PolicySpec spec, std::size_t n) {
    SimulationConfig cfg;
    cfg.policy = std::move(spec);
    cfg.horizon = FixedHorizon{n};
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    rows.push_back(simulation_row(name, cfg.horizon, run(cfg), o.seed));
  };
  simulate("greedy", PolicySpec::greedy(), o.n);
  simulate("timid", PolicySpec::timid(), o.n);
  simulate("threshold", PolicySpec::fixed(kBestStationaryThreshold), o.n);
  const std::size_t finite_n = std::min(o.n, kCompareFiniteCap);
  if (finite_n < o.n) {
    notes.push_back("finite-optimal evaluated at n=" + std::to_string(finite_n) + " instead of n=" +
                    std::to_string(o.n) + " to bound the size of its threshold tables");
  }
  simulate("finite-optimal",
           PolicySpec::finite_optimal(std::make_shared<const FiniteSolution>(solve_finite(Horizon(finite_n), o.grid))),
           finite_n);
  rows.push_back(simulation_row("offline", FixedHorizon{o.n}, run_offline(Horizon(o.n), o.reps, o.seed, o.threads),
                                o.seed));
  d["rows"] = rows;
  d["notes"] = notes;

  rep.human = "config: " + rounded(d["config"]).dump() + "\n" + simulation_table(rows);
  rep.csv = {"# config: " + rounded(d["config"]).dump(), kSimulationHeader};
  for (const auto& row : rows) rep.csv.push_back(simulation_csv_line(row));
  for (const auto& note : notes) {
    rep.human += "note: " + note.get<std::string>() + "\n";
    rep.csv.push_back("# note: " + note.get<std::string>());
  }
  return rep;
}

// ----------------------------------------------------------------- dispatch

inline void emit(const Report& rep, const Options& o, std::ostream& out) {
  const Format format = output_format(o);
  std::string text;
  switch (format) {
    case Format::human: text = rep.human; break;
    case Format::json: text = render_json(rep.data); break;
    case Format::csv:
      for (const auto& line : rep.csv) text += line + "\n";
      break;
  }
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw UsageError("--out", "cannot open '" + o.out + "' for writing");
  f << text;
  if (!f) throw UsageError("--out", "write to '" + o.out + "' failed");
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"On-line selection of alternating subsequences: dynamic programs, policies, simulation", "altseq"};
  app.require_subcommand(1);

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Write results to a .json or .csv file instead of stdout");
    sub->add_flag("--json", o.json, "Print JSON instead of a table");
  };
  auto add_mc = [&](CLI::App* sub) {
    sub->add_option("--reps", o.reps, "Monte Carlo replicates")->capture_default_str();
    sub->add_option("--seed", o.seed, "Base seed of the replicate streams")->capture_default_str();
    sub->add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str();
  };

  auto* offline = app.add_subcommand("offline", "Longest alternating subsequence of n uniforms");
  offline->add_option("--n", o.n, "Sample size")->required();
  add_mc(offline);
  add_output(offline);

  auto* geometric = app.add_subcommand("geometric", "Solve the geometric-horizon problem");
  geometric->add_option("--rho", o.rho, "Discount factor in (0,1)")->required();
  geometric->add_option("--grid", o.grid, "Grid points")->capture_default_str();
  geometric->add_option("--tol", o.tol, "Sup-norm stopping tolerance")->capture_default_str();
  add_output(geometric);

  auto* finite = app.add_subcommand("finite", "Solve the fixed-horizon problem by backward induction");
  finite->add_option("--n", o.n, "Sample size")->required();
  finite->add_option("--grid", o.grid, "Grid points")->capture_default_str();
  finite->add_option("--dump-tables", o.dump_tables, "Write stage,y,value,threshold CSV to this path");
  add_output(finite);

  auto* simulate = app.add_subcommand("simulate", "Simulate one policy");
  simulate->add_option("--policy", o.policy, "Policy to simulate")
      ->required()
      ->check(CLI::IsMember({"greedy", "timid", "threshold", "geometric-optimal", "finite-optimal", "concat"}));
  simulate->add_option("--n", o.n, "Fixed horizon, or finite solution size for concat");
  simulate->add_option("--rho", o.rho, "Geometric horizon parameter");
  simulate->add_option("--xi", o.xi, "Threshold for --policy threshold");
  simulate->add_option("--grid", o.grid, "Grid points for DP-based policies")->capture_default_str();
  add_mc(simulate);
  add_output(simulate);

  auto* compare = app.add_subcommand("compare", "Compare selection rates at a fixed horizon");
  compare->add_option("--n", o.n, "Sample size")->required();
  compare->add_option("--grid", o.grid, "Grid points for the finite-optimal policy")->capture_default_str();
  add_mc(compare);
  add_output(compare);

  std::vector<const char*> argv{"altseq"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  o.command = sub->get_name();
  auto given = [&](const char* flag) { return sub->get_option_no_throw(flag) && sub->count(flag) > 0; };
  o.has_rho = given("--rho");
  o.has_xi = given("--xi");
  o.has_n = given("--n");

  try {
    validate(o);
    Report rep;
    if (o.command == "geometric") rep = run_geometric(o);
    else if (o.command == "finite") rep = run_finite(o);
    else if (o.command == "offline") rep = run_offline_command(o);
    else if (o.command == "simulate") rep = run_simulate(o);
    else rep = run_compare(o);
    emit(rep, o, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

inline int dispatch(int argc, char** argv) {
  return dispatch(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace altseq::cli
