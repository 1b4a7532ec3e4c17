// SPDX-License-Identifier: Apache-2.0
//
// Primal-dual active-set solver for the coupled box-constrained system
//
//   theta*Mass*U + Sk*U + Am*W          = rhs1          (all free rows)
//   Mass*W - S*U - rhs2 - 2*r*d         = mu            (mu = 0 off the active set)
//   alpha*r - alpha*d.U                 = r_hist - d.u_hist   (optional scalar row)
//
// with lower <= U <= upper nodally, mu >= 0 where U sits on the upper bound
// and mu <= 0 where it sits on the lower bound.

#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vifem/linsolve.hpp"

namespace vifem {

struct BoxBounds {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double relax = 0.0;

  double lo() const { return lower - relax; }
  double hi() const { return upper + relax; }
  double clamp(double v) const { return v < lower ? lower : (v > upper ? upper : v); }
  bool contains(double v) const { return v >= lo() && v <= hi(); }
  /// Throws unless lower < upper and relax >= 0.
  void validate() const;
};

/// Scalar auxiliary variable coupling.
struct SavCoupling {
  Vector d;          ///< loads of f(u_bar) / (2 sqrt(E1(u_bar)))
  double alpha = 1;  ///< leading BDF coefficient
  double r_hist = 0; ///< history combination of r
  NodalVector u_hist;
};

struct ViProblem {
  double theta = 1.0;
  SparseMatrix mass;
  SparseMatrix mobility;
  SparseMatrix primal;
  std::optional<SparseMatrix> extra_primal;
  NodalVector rhs1;
  NodalVector rhs2;
  std::optional<SavCoupling> sav;
  BoxBounds bounds;
  /// Homogeneous Dirichlet dofs, removed from both unknowns.
  std::vector<Index> dirichlet;

  Index size() const { return mass.rows(); }
  /// Shapes, finiteness, theta, bounds. Throws on failure.
  void validate() const;
};

struct PdasConfig {
  double c = 1e-2;
  int max_iter = 50;
  bool fix_w_mean = true;
  double kkt_tol = 1e-8;
};

struct PdasIteration {
  std::vector<Index> active_lower;
  std::vector<Index> active_upper;
  Index system_size = 0;
  bool mean_row = false;
  double kkt_residual = 0.0;
};

struct PdasReport {
  int iterations = 0;
  std::vector<PdasIteration> history;
  std::vector<Index> active_lower;
  std::vector<Index> active_upper;
  double kkt_residual = 0.0;
  bool converged = false;
  bool w_mean_fixed = false;
  std::string message;

  bool any_active() const { return !active_lower.empty() || !active_upper.empty(); }
};

struct PdasResult {
  NodalVector u;
  NodalVector w;
  NodalVector mu;
  double r = 0.0;
  PdasReport report;
};

/// Thrown by callers that require convergence; carries the report.
class PdasFailure : public Error {
 public:
  PdasFailure(const std::string& what, PdasReport report) : Error(what), report_(std::move(report)) {}
  const PdasReport& report() const { return report_; }

 private:
  PdasReport report_;
};

/// Runs PDAS from u_init. Non-convergence is reported, not thrown; a singular
/// linear system throws SingularSystemError naming the iteration.
PdasResult pdas_solve(const ViProblem& prob, const PdasConfig& cfg, const NodalVector& u_init);

/// The same coupled system with the box ignored (one linear solve).
PdasResult solve_unconstrained(const ViProblem& prob, const PdasConfig& cfg = {});

/// Max of relative equation residuals, absolute complementarity and sign
/// violations of mu, scaled bound violation, and the relative scalar-row
/// residual when the problem is coupled.
double kkt_residual(const ViProblem& prob, const NodalVector& u, const NodalVector& w, const NodalVector& mu,
                    double r = 0.0);

/// Convex objective whose constrained minimizer is the VI solution:
///   1/2 v.S.v + rhs2.v + 1/(2 theta) |theta*Mass*v - rhs1|^2_{-1}
/// where |b|^2_{-1} = b.z with Am z = b, sum(Mass z) = 0. Requires
/// theta * sum(Mass v) = sum(rhs1) to 1e-9 relative; not defined for coupled,
/// Dirichlet, or extra-primal problems.
double energy_value(const ViProblem& prob, const NodalVector& v);

}  // namespace vifem
