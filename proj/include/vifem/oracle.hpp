// SPDX-License-Identifier: Apache-2.0
//
// Dense reference solver for small stationary obstacle problems and a
// randomized comparison suite against the active-set solver.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vifem/vi_solver.hpp"

namespace vifem::oracle {

struct QpSolution {
  NodalVector u;
  double objective = 0.0;
  int iterations = 0;
};

/// Minimizes the stationary energy over the box intersected with the mass
/// hyperplane by projected gradient steps with exact line search, followed
/// by an exact solve on the identified face. Dense, so only for tiny sizes.
QpSolution projected_gradient(const ViProblem& prob, int max_iter = 20000);

/// Dense evaluation of the stationary energy (no sparse solver involved).
double dense_energy(const ViProblem& prob, const NodalVector& v);

/// Random 1D stationary problem with `cells` P1 cells whose box is chosen
/// tight enough that constraints are active.
ViProblem random_problem(std::uint64_t seed, int cells);

struct Comparison {
  std::uint64_t seed = 0;
  Index dofs = 0;
  double max_diff = 0.0;
  double pdas_energy = 0.0;
  double oracle_energy = 0.0;
  int pdas_iterations = 0;
  bool any_active = false;
  bool pdas_converged = false;
  std::string error;
  bool passed(double tol = 1e-7, double energy_slack = 1e-9) const;
};

/// Runs `count` randomized comparisons starting from `seed`.
std::vector<Comparison> compare_suite(int count, std::uint64_t seed);

}  // namespace vifem::oracle
