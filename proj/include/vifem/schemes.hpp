// SPDX-License-Identifier: Apache-2.0
//
// BDF-k time stepping with clamped extrapolation, the scalar auxiliary
// variable variant, the regularized second-order scheme, stationary solves,
// and initialization.

#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vifem/vi_solver.hpp"

namespace vifem {

/// Exact fraction with a positive denominator, kept in lowest terms.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d = 1);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
};

struct BdfTable {
  int k = 1;
  Rational alpha;
  std::vector<Rational> a_coeffs;  ///< weights of u^n, u^{n-1}, ... in the history term
  std::vector<Rational> b_coeffs;  ///< weights of the extrapolation

  double alpha_value() const { return alpha.value(); }
};

BdfTable bdf_table(int k);

/// Solution history, newest first.
struct TimeState {
  std::deque<NodalVector> history;
  std::deque<double> r_history;
  double t = 0.0;
  double tau = 0.0;
  long steps = 0;

  const NodalVector& current() const { return history.front(); }
  /// Pushes a new newest state and trims the history to `keep` entries.
  void push(NodalVector u, std::optional<double> r, double t_new, std::size_t keep);
};

/// Box whose ends may depend on time.
struct BoundsSchedule {
  std::function<double(double)> lower;
  std::function<double(double)> upper;
  double relax = 0.0;

  static BoundsSchedule fixed(double lower, double upper, double relax = 0.0);
  BoxBounds at(double t) const;
};

/// Nonlinear coefficient M(v, x, t) composed with a discrete state.
using StateFunction = std::function<double(double, const Point&, double)>;
using SourceFunction = std::function<double(const Point&, double)>;

struct SavConfig {
  std::function<double(double)> potential;   ///< F
  std::function<double(double)> derivative;  ///< f = F'
  double c0 = 1.0;
};

/// Operators that do not change between steps on one mesh.
class Discretization {
 public:
  explicit Discretization(std::shared_ptr<const FeSpace> space);

  const FeSpace& space() const { return *space_; }
  std::shared_ptr<const FeSpace> space_ptr() const { return space_; }
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& laplace() const { return laplace_; }
  /// int phi_i for every dof.
  const Vector& mass_weights() const { return weights_; }
  double measure() const { return weights_.sum(); }
  double integral(const NodalVector& v) const { return weights_.dot(v); }

 private:
  std::shared_ptr<const FeSpace> space_;
  SparseMatrix mass_;
  SparseMatrix laplace_;
  Vector weights_;
};

enum class SchemeKind { fourth_order, sav, second_order };

/// One parabolic model. For fourth-order kinds `mobility` is M; for the
/// second-order kind it is the scalar diffusion K (or `matrix_diffusion` is
/// used when set).
struct ParabolicModel {
  SchemeKind kind = SchemeKind::fourth_order;
  StateFunction mobility;
  std::function<Matrix2(const Point&, double)> matrix_diffusion;
  bool degenerate = false;
  double kappa = 1.0;
  std::optional<SavConfig> sav;
  SourceFunction source;
  BoundsSchedule bounds;
};

struct StepInfo {
  PdasReport report;
  NodalVector w;
  BoxBounds bounds;
  double t = 0.0;
  double r = 0.0;
  int order = 1;
  /// |int u^{n+1} - sum(rhs1)/theta|: the per-step mass balance defect.
  double mass_defect = 0.0;
};

/// B_k applied to the newest tbl.k states, clamped nodewise to the
/// unrelaxed box.
NodalVector extrapolate_clamped(const TimeState& state, const BdfTable& tbl, const BoxBounds& bounds);

/// A_k applied to the newest tbl.k states (nodal combination).
NodalVector history_combination(const TimeState& state, const BdfTable& tbl);

/// Builds the coupled problem for one step of size state.tau to t + tau.
ViProblem build_step_problem(const Discretization& disc, const ParabolicModel& model, const TimeState& state,
                             const BdfTable& tbl, NodalVector* extrapolant = nullptr);

/// Advances one step with the given table; throws PdasFailure on
/// non-convergence. `keep` is the history length retained.
StepInfo step(const Discretization& disc, const ParabolicModel& model, TimeState& state, const BdfTable& tbl,
              const PdasConfig& cfg, std::size_t keep);

StepInfo step_fourth_order(const Discretization& disc, const ParabolicModel& model, TimeState& state,
                           const BdfTable& tbl, const PdasConfig& cfg);
StepInfo step_sav(const Discretization& disc, const ParabolicModel& model, TimeState& state, const BdfTable& tbl,
                  const PdasConfig& cfg);
StepInfo step_second_order(const Discretization& disc, const ParabolicModel& model, TimeState& state,
                           const BdfTable& tbl, const PdasConfig& cfg);

struct AdvanceOptions {
  int k = 1;
  long steps = 0;
  /// The first step is split into this many BDF1 substeps.
  int warmup_substeps = 1;
  PdasConfig pdas;
};

using StepObserver = std::function<void(const TimeState&, const StepInfo&)>;

/// Runs `steps` steps. While fewer than k states are known, the order ramps
/// up one at a time (BDF1, BDF2, ...).
void advance(const Discretization& disc, const ParabolicModel& model, TimeState& state, const AdvanceOptions& opt,
             const StepObserver& observer = {});

/// Starts a TimeState at time t0 with r = sqrt(E1(u0)) when the model has a
/// potential.
TimeState start_state(const Discretization& disc, const ParabolicModel& model, NodalVector u0, double t0,
                      double tau);

/// E1(v) = int F(v_h) + C0.
double potential_energy(const FeSpace& space, const NodalVector& v, const SavConfig& sav);
/// sqrt(E1(v)); throws if E1 <= 0.
double sav_init(const FeSpace& space, const NodalVector& v, const SavConfig& sav);

/// Mesh size used by the regularized scheme: h^(p+1) with h the cell
/// diameter.
double regularization_epsilon(const FeSpace& space);

struct StationaryResult {
  PdasResult solution;
  NodalVector initial_guess;
  /// Mass the solution must carry; NaN when no mass constraint applies.
  double target_mass = 0.0;
};

/// Solves the stationary coupled problem
///   (u, v) + (M grad w, grad v) = (f1, v),  w = -div(kappa grad u) + f2
/// with nodal bounds. Rejects data whose mean lies outside the box.
StationaryResult solve_stationary(const Discretization& disc, const Coefficient& f1, const Coefficient& f2,
                                  const Coefficient& mobility, const Coefficient& kappa, const BoxBounds& bounds,
                                  const PdasConfig& cfg);

/// -div(K grad u) = f with homogeneous Dirichlet data, regularized by the
/// small fourth-order term and solved with nodal bounds. The initial guess
/// is the standard Galerkin solution without the regularization.
StationaryResult solve_regularized_elliptic(const Discretization& disc, const Coefficient& diffusion,
                                            const Coefficient& f1, const BoxBounds& bounds, const PdasConfig& cfg);

/// Bound-preserving, mass-conservative initial state from a smooth u0 and
/// its bilaplacian.
NodalVector init_vi(const Discretization& disc, const ScalarField& u0, const ScalarField& bilaplacian_u0,
                    const BoxBounds& bounds, const PdasConfig& cfg = {});

/// Mass-weighted L2-closest nodal vector inside the box with the same
/// integral as `target`.
NodalVector init_postprocess(const Discretization& disc, const NodalVector& target, const BoxBounds& bounds,
                             int max_iter = 100);

}  // namespace vifem
