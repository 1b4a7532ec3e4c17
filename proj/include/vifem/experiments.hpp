// SPDX-License-Identifier: Apache-2.0
//
// Benchmark registry and drivers for convergence studies and long runs.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vifem/manufactured.hpp"
#include "vifem/structure.hpp"

namespace vifem {

enum class PdeKind { stationary, fourth_no_potential, fourth_sav, second_order };
const char* to_string(PdeKind kind);

/// Time step as a function of the mesh size: `h`, `h/<number>`, or a
/// positive literal.
struct TauRule {
  double divisor = 0.0;  // > 0: tau = h / divisor
  double literal = 0.0;  // > 0: tau = literal

  static TauRule parse(const std::string& text);
  double tau(double h) const;
  std::string str() const;
  bool operator==(const TauRule&) const = default;
};

/// User-adjustable settings of one run. Unset optionals take the case
/// defaults.
struct CaseSettings {
  int p = 1;
  int k = 1;
  std::vector<int> cells;  // cells per axis, one entry per refinement level
  std::optional<TauRule> tau_rule;
  std::optional<double> final_time;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> relax;
  PdasConfig pdas;
  std::uint64_t seed = 20240611;
  int warmup_substeps = 1;
  /// Case parameters: "epsilon" for the discontinuous test, "m" for the
  /// porous medium exponent.
  std::map<std::string, double> params;
};

struct StepRecord {
  double t = 0.0;
  double mass = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  double energy = 0.0;
  std::optional<double> modified_energy;
  int pdas_iters = 0;
  bool active = false;
};

struct LevelResult {
  int cells = 0;
  double h = 0.0;
  double tau = 0.0;
  Index dofs = 0;
  long steps = 0;
  double l2_rel = 0.0;
  double h1_rel = 0.0;
  int pdas_max_iter = 0;
  double mass_drift = 0.0;
  double initial_mass = 0.0;
  double bound_violation = 0.0;
  bool ok = true;
  std::string error;
  std::optional<PdasReport> failure;  // set when the active-set solver gave up
  double wall_seconds = 0.0;
};

struct RunResult {
  std::string case_name;
  std::vector<LevelResult> levels;  // sorted by decreasing h
  std::vector<double> eoc_l2;
  std::vector<double> eoc_h1;
  std::vector<StepRecord> trace;
  int pdas_max_iter = 0;
  double max_mass_drift = 0.0;   // largest drift relative to 1 + |initial mass|
  double max_bound_violation = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  /// Final state of the last (or only) level.
  NodalVector final_u;
  std::shared_ptr<const FeSpace> final_space;
};

/// Everything needed to run one case on one mesh.
struct CaseInstance {
  std::shared_ptr<const FeSpace> space;
  BoundsSchedule bounds;
  ParabolicModel model;           // parabolic cases
  NodalVector u0;                 // parabolic cases
  double final_time = 0.0;
  double kappa = 1.0;
  std::optional<SavConfig> sav;
  bool forced = false;
};

struct TestCase {
  std::string name;
  char label = '?';
  PdeKind kind = PdeKind::stationary;
  std::string summary;
  int dim = 2;
  Point lower{0.0, 0.0};
  Point upper{1.0, 1.0};
  double final_time = 0.0;
  std::optional<manufactured::ExactSolution> exact;
  bool reference = false;  // errors against a fine-mesh solve
  CaseSettings defaults;

  Mesh mesh(int cells) const;
  /// Builds the discrete setup for a parabolic case.
  std::function<CaseInstance(const Discretization&, const CaseSettings&)> setup;
  /// Stationary solve for stationary cases.
  std::function<StationaryResult(const Discretization&, const CaseSettings&)> stationary;
};

const std::vector<TestCase>& registry();
/// Throws with the list of known names if `name` is unknown.
const TestCase& find_case(const std::string& name);

/// Merges user settings into the case defaults (user fields win when set).
CaseSettings resolve_settings(const TestCase& tc, const CaseSettings& user);

/// Errors per refinement level and EOC. Failed levels are recorded and the
/// run continues. `jobs > 1` runs levels on parallel threads.
RunResult run_convergence(const TestCase& tc, const CaseSettings& settings, int jobs = 1);

/// One level (settings.cells.back()) with a per-step diagnostics trace.
RunResult run_simulation(const TestCase& tc, const CaseSettings& settings);

/// Nodal initial field for the logarithmic Cahn-Hilliard case:
/// 0.2 + 0.05 * uniform(-1, 1) per dof from a seeded 64-bit Mersenne twister.
NodalVector random_initial_field(Index n, std::uint64_t seed);

}  // namespace vifem
