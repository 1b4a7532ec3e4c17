// SPDX-License-Identifier: Apache-2.0

#include "vifem/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace vifem {

Rational::Rational(long long n, long long d) {
  if (d == 0) throw Error("Rational: zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const long long g = std::gcd(n < 0 ? -n : n, d);
  num = g ? n / g : 0;
  den = g ? d / g : 1;
}

Rational operator+(const Rational& a, const Rational& b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
Rational operator-(const Rational& a, const Rational& b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }

BdfTable bdf_table(int k) {
  BdfTable t;
  t.k = k;
  switch (k) {
    case 1:
      t.alpha = {1};
      t.a_coeffs = {{1}};
      t.b_coeffs = {{1}};
      break;
    case 2:
      t.alpha = {3, 2};
      t.a_coeffs = {{2}, {-1, 2}};
      t.b_coeffs = {{2}, {-1}};
      break;
    case 3:
      t.alpha = {11, 6};
      t.a_coeffs = {{3}, {-3, 2}, {1, 3}};
      t.b_coeffs = {{3}, {-3}, {1}};
      break;
    case 4:
      t.alpha = {25, 12};
      t.a_coeffs = {{4}, {-3}, {4, 3}, {-1, 4}};
      t.b_coeffs = {{4}, {-6}, {4}, {-1}};
      break;
    case 5:
      t.alpha = {137, 60};
      t.a_coeffs = {{5}, {-5}, {10, 3}, {-5, 4}, {1, 5}};
      t.b_coeffs = {{5}, {-10}, {10}, {-5}, {1}};
      break;
    default:
      throw Error("bdf_table: order must be in 1..5, got " + std::to_string(k));
  }
  return t;
}

void TimeState::push(NodalVector u, std::optional<double> r, double t_new, std::size_t keep) {
  history.push_front(std::move(u));
  while (history.size() > keep) history.pop_back();
  if (r) {
    r_history.push_front(*r);
    while (r_history.size() > keep) r_history.pop_back();
  }
  t = t_new;
  ++steps;
}

BoundsSchedule BoundsSchedule::fixed(double lower, double upper, double relax) {
  BoundsSchedule s;
  s.lower = [lower](double) { return lower; };
  s.upper = [upper](double) { return upper; };
  s.relax = relax;
  return s;
}

BoxBounds BoundsSchedule::at(double t) const {
  BoxBounds b;
  if (lower) b.lower = lower(t);
  if (upper) b.upper = upper(t);
  b.relax = relax;
  b.validate();
  return b;
}

Discretization::Discretization(std::shared_ptr<const FeSpace> space)
    : space_(std::move(space)),
      mass_(assemble_mass(*space_)),
      laplace_(assemble_stiffness(*space_)),
      weights_(assemble_load(*space_, Coefficient::constant(1.0))) {}

NodalVector extrapolate_clamped(const TimeState& state, const BdfTable& tbl, const BoxBounds& bounds) {
  if (state.history.size() < static_cast<std::size_t>(tbl.k))
    throw Error("extrapolate_clamped: history shorter than the BDF order");
  NodalVector v = NodalVector::Zero(state.current().size());
  for (int j = 0; j < tbl.k; ++j) v += tbl.b_coeffs[j].value() * state.history[j];
  for (Index i = 0; i < v.size(); ++i) v[i] = bounds.clamp(v[i]);
  return v;
}

NodalVector history_combination(const TimeState& state, const BdfTable& tbl) {
  if (state.history.size() < static_cast<std::size_t>(tbl.k))
    throw Error("history_combination: history shorter than the BDF order");
  NodalVector v = NodalVector::Zero(state.current().size());
  for (int j = 0; j < tbl.k; ++j) v += tbl.a_coeffs[j].value() * state.history[j];
  return v;
}

double potential_energy(const FeSpace& space, const NodalVector& v, const SavConfig& sav) {
  check_length(space, v, "potential_energy");
  const auto& fn = sav.potential;
  const Coefficient integrand = Coefficient::field(v, [&fn](double s, const Point&, double) { return fn(s); });
  return assemble_load(space, integrand, 2).sum() + sav.c0;
}

double sav_init(const FeSpace& space, const NodalVector& v, const SavConfig& sav) {
  const double e1 = potential_energy(space, v, sav);
  if (!(e1 > 0.0) || !std::isfinite(e1)) {
    std::ostringstream msg;
    msg << "E1 = " << e1 << " is not positive; increase C0 (currently " << sav.c0 << ")";
    throw Error(msg.str());
  }
  return std::sqrt(e1);
}

double regularization_epsilon(const FeSpace& space) {
  return std::pow(space.mesh().diameter(), space.order() + 1);
}

namespace {

Coefficient state_coefficient(const NodalVector& v, const StateFunction& fn, double t, bool degenerate) {
  return Coefficient::field(v, [fn](double s, const Point& x, double tt) { return fn(s, x, tt); })
      .at_time(t)
      .degenerate(degenerate);
}

}  // namespace

ViProblem build_step_problem(const Discretization& disc, const ParabolicModel& model, const TimeState& state,
                             const BdfTable& tbl, NodalVector* extrapolant) {
  if (!(state.tau > 0.0)) throw Error("build_step_problem: time step must be positive");
  const FeSpace& space = disc.space();
  const double t_new = state.t + state.tau;
  const BoxBounds bounds = model.bounds.at(t_new);
  NodalVector ubar = extrapolate_clamped(state, tbl, bounds);
  const NodalVector hist = history_combination(state, tbl);

  ViProblem prob;
  prob.theta = tbl.alpha_value() / state.tau;
  prob.mass = disc.mass();
  prob.bounds = bounds;
  prob.rhs1 = disc.mass() * hist / state.tau;
  if (model.source) {
    const SourceFunction& src = model.source;
    prob.rhs1 += assemble_load(space, Coefficient::scalar(src).at_time(t_new));
  }
  prob.rhs2 = NodalVector::Zero(space.num_dofs());

  switch (model.kind) {
    case SchemeKind::fourth_order:
    case SchemeKind::sav: {
      if (!model.mobility) throw Error("build_step_problem: fourth-order model needs a mobility");
      prob.mobility = assemble_stiffness(space, state_coefficient(ubar, model.mobility, t_new, model.degenerate));
      prob.primal = model.kappa * disc.laplace();
      if (model.kind == SchemeKind::sav) {
        if (!model.sav) throw Error("build_step_problem: SAV model without a potential");
        const SavConfig& sav = *model.sav;
        if (state.r_history.size() < static_cast<std::size_t>(tbl.k))
          throw Error("build_step_problem: SAV history shorter than the BDF order");
        const double root = sav_init(space, ubar, sav);
        const auto& f = sav.derivative;
        SavCoupling c;
        c.d = assemble_load(space, Coefficient::field(ubar, [&f, root](double s, const Point&, double) {
                                 return f(s) / (2.0 * root);
                               }));
        c.alpha = tbl.alpha_value();
        c.r_hist = 0.0;
        for (int j = 0; j < tbl.k; ++j) c.r_hist += tbl.a_coeffs[j].value() * state.r_history[j];
        c.u_hist = hist;
        prob.sav = std::move(c);
      }
      break;
    }
    case SchemeKind::second_order: {
      const double scale = std::sqrt(regularization_epsilon(space));
      prob.mobility = scale * disc.laplace();
      prob.primal = prob.mobility;
      if (model.matrix_diffusion) {
        prob.extra_primal = assemble_stiffness(
            space, Coefficient::matrix(model.matrix_diffusion).at_time(t_new).degenerate(model.degenerate));
      } else {
        if (!model.mobility) throw Error("build_step_problem: second-order model needs a diffusion");
        prob.extra_primal =
            assemble_stiffness(space, state_coefficient(ubar, model.mobility, t_new, model.degenerate));
      }
      break;
    }
  }
  if (extrapolant) *extrapolant = std::move(ubar);
  return prob;
}

StepInfo step(const Discretization& disc, const ParabolicModel& model, TimeState& state, const BdfTable& tbl,
              const PdasConfig& cfg, std::size_t keep) {
  NodalVector ubar;
  const ViProblem prob = build_step_problem(disc, model, state, tbl, &ubar);
  PdasResult res = pdas_solve(prob, cfg, ubar);
  const double t_new = state.t + state.tau;
  if (!res.report.converged) {
    std::ostringstream msg;
    msg << "PDAS did not converge in the step to t = " << t_new << ": " << res.report.message;
    throw PdasFailure(msg.str(), res.report);
  }
  StepInfo info;
  info.report = std::move(res.report);
  info.w = std::move(res.w);
  info.bounds = prob.bounds;
  info.t = t_new;
  info.r = res.r;
  info.order = tbl.k;
  info.mass_defect = std::abs(disc.integral(res.u) - prob.rhs1.sum() / prob.theta);
  std::optional<double> r;
  if (prob.sav) r = res.r;
  state.push(std::move(res.u), r, t_new, keep);
  return info;
}

StepInfo step_fourth_order(const Discretization& disc, const ParabolicModel& model, TimeState& state,
                           const BdfTable& tbl, const PdasConfig& cfg) {
  if (model.kind != SchemeKind::fourth_order) throw Error("step_fourth_order: model is not of fourth-order kind");
  return step(disc, model, state, tbl, cfg, static_cast<std::size_t>(tbl.k));
}

StepInfo step_sav(const Discretization& disc, const ParabolicModel& model, TimeState& state, const BdfTable& tbl,
                  const PdasConfig& cfg) {
  if (model.kind != SchemeKind::sav) throw Error("step_sav: model is not of SAV kind");
  return step(disc, model, state, tbl, cfg, static_cast<std::size_t>(tbl.k));
}

StepInfo step_second_order(const Discretization& disc, const ParabolicModel& model, TimeState& state,
                           const BdfTable& tbl, const PdasConfig& cfg) {
  if (model.kind != SchemeKind::second_order) throw Error("step_second_order: model is not of second-order kind");
  return step(disc, model, state, tbl, cfg, static_cast<std::size_t>(tbl.k));
}

TimeState start_state(const Discretization& disc, const ParabolicModel& model, NodalVector u0, double t0,
                      double tau) {
  check_length(disc.space(), u0, "start_state");
  TimeState s;
  s.t = t0;
  s.tau = tau;
  if (model.kind == SchemeKind::sav) {
    if (!model.sav) throw Error("start_state: SAV model without a potential");
    s.r_history.push_back(sav_init(disc.space(), u0, *model.sav));
  }
  s.history.push_back(std::move(u0));
  return s;
}

void advance(const Discretization& disc, const ParabolicModel& model, TimeState& state, const AdvanceOptions& opt,
             const StepObserver& observer) {
  if (opt.k < 1 || opt.k > 5) throw Error("advance: BDF order must be in 1..5");
  if (opt.warmup_substeps < 1) throw Error("advance: warm-up substeps must be >= 1");
  if (state.history.empty()) throw Error("advance: empty history");
  const std::size_t keep = static_cast<std::size_t>(opt.k);
  const bool sav = model.kind == SchemeKind::sav;
  for (long s = 0; s < opt.steps; ++s) {
    const int order = std::min<int>(opt.k, static_cast<int>(state.history.size()));
    StepInfo info;
    if (order == 1 && opt.k > 1 && opt.warmup_substeps > 1) {
      TimeState sub = state;
      sub.tau = state.tau / opt.warmup_substeps;
      const BdfTable first = bdf_table(1);
      int max_iter = 0;
      for (int j = 0; j < opt.warmup_substeps; ++j) {
        info = step(disc, model, sub, first, opt.pdas, 1);
        max_iter = std::max(max_iter, info.report.iterations);
      }
      info.report.iterations = max_iter;
      std::optional<double> r;
      if (sav) r = sub.r_history.front();
      state.push(sub.current(), r, sub.t, keep);
    } else {
      info = step(disc, model, state, bdf_table(order), opt.pdas, keep);
    }
    if (sav && order < opt.k) {
      state.r_history.front() = sav_init(disc.space(), state.current(), *model.sav);
      info.r = state.r_history.front();
    }
    if (observer) observer(state, info);
  }
}

StationaryResult solve_stationary(const Discretization& disc, const Coefficient& f1, const Coefficient& f2,
                                  const Coefficient& mobility, const Coefficient& kappa, const BoxBounds& bounds,
                                  const PdasConfig& cfg) {
  const FeSpace& space = disc.space();
  bounds.validate();
  ViProblem prob;
  prob.theta = 1.0;
  prob.mass = disc.mass();
  prob.mobility = assemble_stiffness(space, mobility);
  prob.primal = assemble_stiffness(space, kappa);
  prob.rhs1 = assemble_load(space, f1);
  prob.rhs2 = assemble_load(space, f2);
  prob.bounds = bounds;

  const double mean = prob.rhs1.sum() / disc.measure();
  const double slack = 1e-12 * (1.0 + std::abs(mean));
  if (mean < bounds.lower - slack || mean > bounds.upper + slack) {
    std::ostringstream msg;
    msg << "solve_stationary: mean of f1 (" << mean << ") lies outside [" << bounds.lower << ", " << bounds.upper
        << "], so no admissible state has the required mass";
    throw Error(msg.str());
  }

  StationaryResult out;
  out.target_mass = prob.rhs1.sum();
  out.initial_guess = solve_unconstrained(prob, cfg).u;
  out.solution = pdas_solve(prob, cfg, out.initial_guess);
  if (!out.solution.report.converged)
    throw PdasFailure("solve_stationary: " + out.solution.report.message, out.solution.report);
  return out;
}

StationaryResult solve_regularized_elliptic(const Discretization& disc, const Coefficient& diffusion,
                                            const Coefficient& f1, const BoxBounds& bounds, const PdasConfig& cfg) {
  const FeSpace& space = disc.space();
  bounds.validate();
  ViProblem prob;
  prob.theta = 0.0;
  prob.mass = disc.mass();
  const double scale = std::sqrt(regularization_epsilon(space));
  prob.mobility = scale * disc.laplace();
  prob.primal = prob.mobility;
  prob.extra_primal = assemble_stiffness(space, diffusion);
  prob.rhs1 = assemble_load(space, f1);
  prob.rhs2 = NodalVector::Zero(space.num_dofs());
  prob.bounds = bounds;
  prob.dirichlet = space.boundary_dofs();

  // Standard Galerkin solve on the interior dofs.
  std::vector<char> fixed(space.num_dofs(), 0);
  for (Index i : prob.dirichlet) fixed[i] = 1;
  std::vector<Index> interior;
  for (Index i = 0; i < space.num_dofs(); ++i)
    if (!fixed[i]) interior.push_back(i);
  SparseMatrix e(space.num_dofs(), static_cast<Index>(interior.size()));
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t j = 0; j < interior.size(); ++j) trip.emplace_back(interior[j], static_cast<Index>(j), 1.0);
  e.setFromTriplets(trip.begin(), trip.end());
  const SparseMatrix et = e.transpose();
  const DirectSolver galerkin(SparseMatrix(et * *prob.extra_primal * e), "Dirichlet Galerkin solve");
  StationaryResult out;
  out.target_mass = std::numeric_limits<double>::quiet_NaN();
  out.initial_guess = e * galerkin.solve(et * prob.rhs1);

  out.solution = pdas_solve(prob, cfg, out.initial_guess);
  if (!out.solution.report.converged)
    throw PdasFailure("solve_regularized_elliptic: " + out.solution.report.message, out.solution.report);
  return out;
}

NodalVector init_vi(const Discretization& disc, const ScalarField& u0, const ScalarField& bilaplacian_u0,
                    const BoxBounds& bounds, const PdasConfig& cfg) {
  const Coefficient f1 = Coefficient::scalar([u0, bilaplacian_u0](const Point& x, double) {
    return u0(x) + bilaplacian_u0(x);
  });
  const Coefficient one = Coefficient::constant(1.0);
  return solve_stationary(disc, f1, Coefficient::constant(0.0), one, one, bounds, cfg).solution.u;
}

NodalVector init_postprocess(const Discretization& disc, const NodalVector& target, const BoxBounds& bounds,
                             int max_iter) {
  check_length(disc.space(), target, "init_postprocess");
  bounds.validate();
  const Index n = target.size();
  const Vector& m = disc.mass_weights();
  const SparseMatrix& mass = disc.mass();
  const double total = m.dot(target);
  const double measure = m.sum();
  const double mean = total / measure;
  const double slack = 1e-12 * (1.0 + std::abs(mean));
  if (mean < bounds.lower - slack || mean > bounds.upper + slack) {
    std::ostringstream msg;
    msg << "init_postprocess: mean " << mean << " lies outside [" << bounds.lower << ", " << bounds.upper << "]";
    throw Error(msg.str());
  }
  const double c = mass.diagonal().mean();
  const Vector mt = mass * target;

  // status: 0 inactive, -1 lower, +1 upper
  std::vector<int> st(n, 0);
  auto classify = [&](const Vector& v, const Vector& mu) {
    std::vector<int> out(n, 0);
    for (Index i = 0; i < n; ++i) {
      const double s = v[i] + mu[i] / c;
      if (s > bounds.hi()) out[i] = 1;
      else if (s < bounds.lo()) out[i] = -1;
    }
    return out;
  };
  st = classify(target, Vector::Zero(n));
  Vector v = target;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<Index> inactive;
    Vector known = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (st[i] == 0) inactive.push_back(i);
      else known[i] = st[i] > 0 ? bounds.upper : bounds.lower;
    }
    double lambda = 0.0;
    v = known;
    if (!inactive.empty()) {
      const Index ni = static_cast<Index>(inactive.size());
      SparseMatrix e(n, ni);
      std::vector<Eigen::Triplet<double>> trip;
      for (Index j = 0; j < ni; ++j) trip.emplace_back(inactive[j], j, 1.0);
      e.setFromTriplets(trip.begin(), trip.end());
      const SparseMatrix et = e.transpose();
      BlockSystem sys;
      sys.a = et * mass * e;
      Border bd;
      bd.column = Vector::Zero(ni + 1);
      bd.column.head(ni) = et * m;
      bd.row = bd.column;
      sys.borders.push_back(std::move(bd));
      Vector rhs(ni + 1);
      rhs.head(ni) = et * (mt - mass * known);
      rhs[ni] = total - m.dot(known);
      const Vector x = solve(sys, rhs, "mass-constrained projection");
      v += e * x.head(ni);
      lambda = x[ni];
    }
    Vector mu = -(mass * (v - target) + lambda * m);
    for (Index i : inactive) mu[i] = 0.0;
    std::vector<int> next = classify(v, mu);
    if (next == st) {
      if (std::abs(m.dot(v) - total) > 1e-10 * (std::abs(total) + measure))
        throw Error("init_postprocess: active set fixes more mass than is available");
      return v;
    }
    st = std::move(next);
  }
  throw Error("init_postprocess: active set did not settle within " + std::to_string(max_iter) + " iterations");
}

}  // namespace vifem
