// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: list cases, run convergence studies, long
// simulations and stationary solves from a JSON config, or run the oracle
// self-test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"
#include "vifem/experiments.hpp"
#include "vifem/linsolve.hpp"
#include "vifem/oracle.hpp"
#include "vifem/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vifem;

namespace {

constexpr int exit_failure = 1;
constexpr int exit_config = 2;
constexpr int exit_pdas = 3;

struct Options {
  std::string config;
  std::string out;
  int jobs = 1;
  bool no_timestamp = false;
  int selftest_count = 20;
  std::uint64_t selftest_seed = 1;
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, bool stamp) : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    out_.imbue(std::locale::classic());
    if (stamp) out_ << "# generated " << timestamp() << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

// Index lists beyond this length are truncated; the full counts are kept.
constexpr std::size_t max_listed_dofs = 64;

json index_list(const std::vector<Index>& dofs) {
  const std::size_t n = std::min(dofs.size(), max_listed_dofs);
  return {{"count", dofs.size()}, {"dofs", std::vector<Index>(dofs.begin(), dofs.begin() + static_cast<long>(n))},
          {"truncated", n < dofs.size()}};
}

json report_json(const PdasReport& r) {
  json h = json::array();
  for (const PdasIteration& it : r.history)
    h.push_back({{"active_lower", it.active_lower.size()},
                 {"active_upper", it.active_upper.size()},
                 {"system_size", it.system_size},
                 {"mean_row", it.mean_row},
                 {"kkt_residual", it.kkt_residual}});
  return {{"iterations", r.iterations}, {"converged", r.converged},     {"kkt_residual", r.kkt_residual},
          {"active_lower", index_list(r.active_lower)}, {"active_upper", index_list(r.active_upper)}, {"w_mean_fixed", r.w_mean_fixed},
          {"message", r.message},           {"history", h}};
}

void emit_error(const json& record) { std::cerr << record.dump() << std::endl; }

void write_manifest(const fs::path& dir, const RunConfig& cfg, const RunResult& run, const std::vector<std::string>& files,
                    bool stamp) {
  json m;
  m["config"] = json::parse(dump_run_config(cfg));
  m["versions"] = {{"vifem", library_version()},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"linear_solver", DirectSolver::backend()}};
  m["seed"] = run.seed;
  m["outputs"] = files;
  m["summary"] = {{"pdas_max_iter", run.pdas_max_iter},
                  {"max_mass_drift", run.max_mass_drift},
                  {"max_bound_violation", run.max_bound_violation},
                  {"eoc_l2", run.eoc_l2},
                  {"eoc_h1", run.eoc_h1}};
  json levels = json::array();
  for (const LevelResult& lv : run.levels) {
    json l = {{"cells", lv.cells}, {"h", lv.h},           {"tau", lv.tau},       {"dofs", lv.dofs},
              {"steps", lv.steps}, {"l2_rel", lv.l2_rel}, {"h1_rel", lv.h1_rel}, {"ok", lv.ok}};
    if (!lv.ok) l["error"] = lv.error;
    levels.push_back(l);
  }
  m["levels"] = levels;
  if (stamp) {
    m["timestamp"] = timestamp();
    m["wall_seconds"] = run.wall_seconds;
  }
  std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
}

RunConfig read_config(const Options& opt) {
  RunConfig cfg = load_run_config(opt.config);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  return cfg;
}

fs::path prepare_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

int failed_levels(const RunResult& run) {
  for (const LevelResult& lv : run.levels) {
    if (lv.ok) continue;
    json rec = {{"error", lv.failure ? "pdas" : "solver"}, {"case", run.case_name}, {"cells", lv.cells},
                {"message", lv.error}};
    if (lv.failure) rec["report"] = report_json(*lv.failure);
    emit_error(rec);
  }
  for (const LevelResult& lv : run.levels)
    if (!lv.ok) return lv.failure ? exit_pdas : exit_failure;
  return 0;
}

int cmd_list() {
  for (const TestCase& tc : registry()) std::cout << tc.name << "\n";
  return 0;
}

int cmd_converge(const Options& opt) {
  const RunConfig cfg = read_config(opt);
  const TestCase& tc = find_case(cfg.case_name);
  if (!tc.exact && !tc.reference)
    throw ConfigError("case", 1, "case " + tc.name + " has neither an exact solution nor a reference recipe");
  const RunResult run = run_convergence(tc, cfg.settings, opt.jobs);
  const fs::path dir = prepare_dir(cfg);
  const std::string name = tc.name + "_convergence.csv";
  CsvWriter csv(dir / name, !opt.no_timestamp);
  csv.row({"h", "dofs", "l2_rel", "h1_rel", "eoc_l2", "eoc_h1", "pdas_max_iter", "cells", "tau", "steps",
           "mass_drift", "bound_violation", "status"});
  for (std::size_t i = 0; i < run.levels.size(); ++i) {
    const LevelResult& lv = run.levels[i];
    const bool has_eoc = i > 0 && i - 1 < run.eoc_l2.size();
    csv.row({fmt(lv.h), std::to_string(lv.dofs), fmt(lv.l2_rel), fmt(lv.h1_rel),
             has_eoc ? fmt(run.eoc_l2[i - 1]) : "", has_eoc && i - 1 < run.eoc_h1.size() ? fmt(run.eoc_h1[i - 1]) : "",
             std::to_string(lv.pdas_max_iter), std::to_string(lv.cells), fmt(lv.tau), std::to_string(lv.steps),
             fmt(lv.mass_drift), fmt(lv.bound_violation), lv.ok ? "ok" : "failed"});
  }
  write_manifest(dir, cfg, run, {name}, !opt.no_timestamp);
  std::cout << (dir / name).string() << "\n";
  return failed_levels(run);
}

void write_solution(const fs::path& path, const RunResult& run, bool stamp) {
  CsvWriter csv(path, stamp);
  const FeSpace& space = *run.final_space;
  if (space.dim() == 1) csv.row({"x", "u"});
  else csv.row({"x", "y", "u"});
  const auto& xs = space.dof_coordinates();
  for (Index i = 0; i < space.num_dofs(); ++i) {
    if (space.dim() == 1) csv.row({fmt(xs[i][0]), fmt(run.final_u[i])});
    else csv.row({fmt(xs[i][0]), fmt(xs[i][1]), fmt(run.final_u[i])});
  }
}

int cmd_simulate(const Options& opt, bool stationary_only) {
  const RunConfig cfg = read_config(opt);
  const TestCase& tc = find_case(cfg.case_name);
  if (stationary_only && tc.kind != PdeKind::stationary)
    throw ConfigError("case", 1, "case " + tc.name + " is not stationary; use simulate");
  if (!stationary_only && tc.kind == PdeKind::stationary)
    throw ConfigError("case", 1, "case " + tc.name + " is stationary; use the stationary subcommand");
  const RunResult run = run_simulation(tc, cfg.settings);
  if (const int code = failed_levels(run)) return code;
  const fs::path dir = prepare_dir(cfg);
  std::vector<std::string> files;
  if (!stationary_only) {
    const std::string name = tc.name + "_trace.csv";
    CsvWriter csv(dir / name, !opt.no_timestamp);
    csv.row({"t", "mass", "min_u", "max_u", "energy", "pdas_iters", "modified_energy", "active"});
    for (const StepRecord& r : run.trace)
      csv.row({fmt(r.t), fmt(r.mass), fmt(r.min_u), fmt(r.max_u), fmt(r.energy), std::to_string(r.pdas_iters),
               r.modified_energy ? fmt(*r.modified_energy) : "", r.active ? "1" : "0"});
    files.push_back(name);
  } else {
    const LevelResult& lv = run.levels.front();
    const std::string name = tc.name + "_summary.csv";
    CsvWriter csv(dir / name, !opt.no_timestamp);
    csv.row({"h", "dofs", "l2_rel", "h1_rel", "pdas_iters", "mass", "min_u", "max_u"});
    const StepRecord& r = run.trace.front();
    csv.row({fmt(lv.h), std::to_string(lv.dofs), fmt(lv.l2_rel), fmt(lv.h1_rel), std::to_string(lv.pdas_max_iter),
             fmt(r.mass), fmt(r.min_u), fmt(r.max_u)});
    files.push_back(name);
  }
  const std::string sol = tc.name + "_solution.csv";
  write_solution(dir / sol, run, !opt.no_timestamp);
  files.push_back(sol);
  write_manifest(dir, cfg, run, files, !opt.no_timestamp);
  for (const auto& f : files) std::cout << (dir / f).string() << "\n";
  return 0;
}

int cmd_selftest(const Options& opt) {
  const auto results = oracle::compare_suite(opt.selftest_count, opt.selftest_seed);
  int failures = 0;
  for (const auto& c : results) {
    const bool ok = c.passed();
    failures += ok ? 0 : 1;
    std::cout << (ok ? "ok   " : "FAIL ") << "seed=" << c.seed << " dofs=" << c.dofs << " diff=" << fmt(c.max_diff)
              << " pdas_energy=" << fmt(c.pdas_energy) << " oracle_energy=" << fmt(c.oracle_energy)
              << " iterations=" << c.pdas_iterations;
    if (!c.error.empty()) std::cout << " error=" << c.error;
    std::cout << "\n";
  }
  std::cout << results.size() - static_cast<std::size_t>(failures) << "/" << results.size() << " comparisons passed\n";
  return failures == 0 ? 0 : exit_failure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bound-preserving, mass-conservative finite element solver"};
  app.require_subcommand(1);
  Options opt;

  app.add_subcommand("list", "print the registered cases, one per line");
  std::vector<CLI::App*> runs;
  for (const char* name : {"converge", "simulate", "stationary"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "converge"      ? "run a refinement study"
                                         : std::string(name) == "simulate"    ? "run one time-dependent case"
                                                                              : "run one stationary case");
    sub->add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides the config)");
    sub->add_option("--jobs", opt.jobs, "parallel refinement levels")->check(CLI::PositiveNumber);
    sub->add_flag("--no-timestamp", opt.no_timestamp, "omit timestamps so reruns are byte-identical");
    runs.push_back(sub);
  }
  auto* self = app.add_subcommand("selftest", "compare the active-set solver with a dense reference solver");
  self->add_option("--count", opt.selftest_count, "number of random problems")->check(CLI::PositiveNumber);
  self->add_option("--seed", opt.selftest_seed, "first random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "list") return cmd_list();
    if (cmd == "converge") return cmd_converge(opt);
    if (cmd == "simulate") return cmd_simulate(opt, false);
    if (cmd == "stationary") return cmd_simulate(opt, true);
    return cmd_selftest(opt);
  } catch (const ConfigError& e) {
    emit_error({{"error", "config"}, {"field", e.field()}, {"line", e.line()}, {"message", e.what()}});
    return exit_config;
  } catch (const PdasFailure& e) {
    emit_error({{"error", "pdas"}, {"message", e.what()}, {"report", report_json(e.report())}});
    return exit_pdas;
  } catch (const std::exception& e) {
    emit_error({{"error", "runtime"}, {"message", e.what()}});
    return exit_failure;
  }
}
