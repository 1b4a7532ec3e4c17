// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "vifem/schemes.hpp"

namespace vifem {

struct Diagnostics {
  double t = 0.0;
  double mass = 0.0;
  double min = 0.0;
  double max = 0.0;
  double dirichlet_energy = 0.0;  // kappa/2 |grad u|^2
  std::optional<double> e1;
  std::optional<double> modified_energy;  // kappa/2 |grad u|^2 + r^2
};

Diagnostics diagnostics(const Discretization& disc, const NodalVector& u, double t, double kappa = 1.0,
                        const SavConfig* sav = nullptr, std::optional<double> r = std::nullopt);

struct ProjectionReport {
  double mean = 0.0;  // average of the input
  double c1 = 0.0;
  double c2 = 0.0;
  double sup_norm = 0.0;  // sampled sup of the shifted interpolant, centered
  bool blended = false;
};

/// Bound-preserving, mass-conservative map into the FE space: interpolate,
/// shift by a constant to restore the mean, then blend toward the mean if
/// the box is violated. Throws if the blending weight leaves (0, 1).
NodalVector bp_mc_project(const FeSpace& space, const ScalarField& v, const BoxBounds& bounds,
                          ProjectionReport* report = nullptr);
/// Same map for a discrete input on another (typically finer) space.
NodalVector bp_mc_project(const FeSpace& space, const FeSpace& source_space, const NodalVector& v,
                          const BoxBounds& bounds, ProjectionReport* report = nullptr);

/// Rates log(e_j/e_{j+1}) / log(h_j/h_{j+1}).
std::vector<double> eoc(const std::vector<std::pair<double, double>>& errors);

struct ErrorNorms {
  double l2 = 0.0;  // relative unless `absolute`
  double h1 = 0.0;
  double l2_abs = 0.0;
  double h1_abs = 0.0;
  bool absolute = false;  // exact solution has zero norm
};

using GradientField = std::function<Gradient(const Point&)>;

/// Relative L2 and H1-seminorm errors with two extra quadrature points per
/// axis. If `grad` is empty the H1 entries are zero.
ErrorNorms error_norms(const FeSpace& space, const NodalVector& uh, const ScalarField& exact,
                       const GradientField& grad = {});

/// Errors against a discrete reference, integrated over the cells of the
/// reference mesh.
ErrorNorms reference_error(const FeSpace& space, const NodalVector& uh, const FeSpace& ref_space,
                           const NodalVector& ref);

}  // namespace vifem
