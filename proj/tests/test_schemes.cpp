// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vifem/schemes.hpp"
#include "vifem/structure.hpp"

namespace vifem {
namespace {

using std::numbers::pi;
using testing::unit_interval;
using testing::unit_square;

TEST(BdfTable, SecondOrderCoefficients) {
  const BdfTable t = bdf_table(2);
  EXPECT_EQ(t.alpha, Rational(3, 2));
  ASSERT_EQ(t.a_coeffs.size(), 2u);
  EXPECT_EQ(t.a_coeffs[0], Rational(2));
  EXPECT_EQ(t.a_coeffs[1], Rational(-1, 2));
  ASSERT_EQ(t.b_coeffs.size(), 2u);
  EXPECT_EQ(t.b_coeffs[0], Rational(2));
  EXPECT_EQ(t.b_coeffs[1], Rational(-1));
}

TEST(BdfTable, FifthOrderCoefficients) {
  const BdfTable t = bdf_table(5);
  EXPECT_EQ(t.alpha, Rational(137, 60));
  const Rational expected[] = {Rational(5), Rational(-5), Rational(10, 3), Rational(-5, 4), Rational(1, 5)};
  ASSERT_EQ(t.a_coeffs.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(t.a_coeffs[i], expected[i]) << i;
}

TEST(BdfTable, LeadingCoefficientsOfEveryOrder) {
  const Rational alpha[] = {Rational(1), Rational(3, 2), Rational(11, 6), Rational(25, 12), Rational(137, 60)};
  for (int k = 1; k <= 5; ++k) EXPECT_EQ(bdf_table(k).alpha, alpha[k - 1]) << k;
}

TEST(BdfTable, ConsistencyIsExactInRationalArithmetic) {
  for (int k = 1; k <= 5; ++k) {
    const BdfTable t = bdf_table(k);
    Rational sa, sb;
    for (const Rational& a : t.a_coeffs) sa = sa + a;
    for (const Rational& b : t.b_coeffs) sb = sb + b;
    EXPECT_EQ(sa - t.alpha, Rational(0)) << k;
    EXPECT_EQ(sb, Rational(1)) << k;
  }
}

TEST(BdfTable, RejectsOrdersOutsideOneToFive) {
  EXPECT_THROW(bdf_table(0), Error);
  EXPECT_THROW(bdf_table(6), Error);
}

TEST(Rational, LowestTermsAndPositiveDenominator) {
  const Rational r(4, -6);
  EXPECT_EQ(r.num, -2);
  EXPECT_EQ(r.den, 3);
  EXPECT_THROW(Rational(1, 0), Error);
}

TimeState history_of(std::initializer_list<NodalVector> newest_first) {
  TimeState s;
  for (const NodalVector& v : newest_first) s.history.push_back(v);
  return s;
}

TEST(ExtrapolateClamped, FirstOrderIsTheClampedNewestState) {
  NodalVector u(3);
  u << 0.2, 0.7, 1.3;
  const NodalVector out = extrapolate_clamped(history_of({u}), bdf_table(1), BoxBounds{0.0, 1.0, 0.0});
  EXPECT_EQ(out[0], 0.2);
  EXPECT_EQ(out[1], 0.7);
  EXPECT_EQ(out[2], 1.0);
}

TEST(ExtrapolateClamped, SecondOrderOvershootIsClamped) {
  NodalVector now(1), before(1);
  now << 1.2;
  before << 0.9;
  const NodalVector out = extrapolate_clamped(history_of({now, before}), bdf_table(2), BoxBounds{0.0, 1.0, 0.0});
  EXPECT_EQ(out[0], 1.0);
}

TEST(ExtrapolateClamped, ClampsToTheUnrelaxedBox) {
  NodalVector u(1);
  u << -1e-12;
  const NodalVector out = extrapolate_clamped(history_of({u}), bdf_table(1), BoxBounds{0.0, 1.0, 1e-10});
  EXPECT_EQ(out[0], 0.0);
}

TEST(ExtrapolateClamped, ConstantHistoryIsReproducedForEveryOrder) {
  for (int k = 1; k <= 5; ++k) {
    TimeState s;
    for (int j = 0; j < k; ++j) s.history.push_back(NodalVector::Constant(4, 0.375));
    const NodalVector out = extrapolate_clamped(s, bdf_table(k), BoxBounds{0.0, 1.0, 0.0});
    EXPECT_LE((out.array() - 0.375).abs().maxCoeff(), 1e-14) << k;
  }
}

TEST(ExtrapolateClamped, ShortHistoryIsRejected) {
  EXPECT_THROW(extrapolate_clamped(history_of({NodalVector::Zero(2)}), bdf_table(2), BoxBounds{0.0, 1.0, 0.0}),
               Error);
}

ParabolicModel fourth_order_model(StateFunction mobility, BoxBounds box) {
  ParabolicModel m;
  m.kind = SchemeKind::fourth_order;
  m.mobility = std::move(mobility);
  m.bounds = BoundsSchedule::fixed(box.lower, box.upper, box.relax);
  return m;
}

TEST(StepFourthOrder, ConstantStateIsSteady) {
  const auto space = unit_square(6, 2);
  const Discretization disc(space);
  const ParabolicModel model =
      fourth_order_model([](double v, const Point&, double) { return 1.0 + v * v; }, BoxBounds{0.0, 1.0, 0.0});
  TimeState state = start_state(disc, model, NodalVector::Constant(space->num_dofs(), 0.4), 0.0, 1e-2);
  AdvanceOptions opt;
  opt.k = 2;
  opt.steps = 5;
  advance(disc, model, state, opt);
  EXPECT_LE((state.current().array() - 0.4).abs().maxCoeff(), 1e-12);
  EXPECT_NEAR(state.t, 0.05, 1e-15);
}

TEST(StepFourthOrder, FirstOrderDissipatesTheDirichletEnergyAndConservesMass) {
  const auto space = build_space(Mesh::interval(0.0, 1.0, 40), 1);
  const Discretization disc(space);
  const ParabolicModel model =
      fourth_order_model([](double v, const Point&, double) { return v; }, BoxBounds{0.0, 1.0, 0.0});
  auto init = [](const Point& x) { return 0.5 + 0.3 * std::cos(pi * x[0]) + 0.1 * std::cos(5 * pi * x[0]); };
  NodalVector u0 = interpolate(*space, init);
  for (Index i = 0; i < u0.size(); ++i) u0[i] = std::clamp(u0[i], 0.0, 1.0);
  ASSERT_GT(u0.minCoeff(), 0.0);
  TimeState state = start_state(disc, model, u0, 0.0, 1e-3);
  const double m0 = disc.integral(u0);
  const double e0 = diagnostics(disc, u0, 0.0).dirichlet_energy;
  double previous = e0;
  AdvanceOptions opt;
  opt.k = 1;
  opt.steps = 40;
  int n = 0;
  advance(disc, model, state, opt, [&](const TimeState& s, const StepInfo& info) {
    ++n;
    const double e = diagnostics(disc, s.current(), s.t).dirichlet_energy;
    EXPECT_LE(e, previous + 1e-10 * e0) << "step " << n;
    previous = e;
    EXPECT_GE(s.current().minCoeff(), 0.0);
    EXPECT_LE(s.current().maxCoeff(), 1.0);
    EXPECT_LE(std::abs(disc.integral(s.current()) - m0), n * 1e-11 * (1.0 + std::abs(m0)));
    EXPECT_TRUE(info.report.converged);
  });
  EXPECT_EQ(n, 40);
  EXPECT_LT(previous, e0);
}

TEST(StepFourthOrder, RejectsNonPositiveMobility) {
  const auto space = unit_interval(8, 1);
  const Discretization disc(space);
  const ParabolicModel model =
      fourth_order_model([](double v, const Point&, double) { return v - 0.5; }, BoxBounds{0.0, 1.0, 0.0});
  TimeState state = start_state(disc, model, NodalVector::Constant(space->num_dofs(), 0.3), 0.0, 1e-2);
  EXPECT_THROW(step_fourth_order(disc, model, state, bdf_table(1), PdasConfig{}), Error);
}

// u = cos(pi x) exp(-t) solves u_t = (w)_xx + f, w = -u_xx on (0, 1) with
// f = (pi^4 - 1) cos(pi x) exp(-t) and homogeneous Neumann data.
double temporal_error(int k, double tau, double final_time) {
  const auto space = build_space(Mesh::interval(0.0, 1.0, 24), 4);
  const Discretization disc(space);
  ParabolicModel model =
      fourth_order_model([](double, const Point&, double) { return 1.0; }, BoxBounds{-10.0, 10.0, 0.0});
  model.source = [](const Point& x, double t) { return (std::pow(pi, 4) - 1.0) * std::cos(pi * x[0]) * std::exp(-t); };
  const NodalVector u0 = interpolate(*space, [](const Point& x) { return std::cos(pi * x[0]); });
  TimeState state = start_state(disc, model, u0, 0.0, tau);
  AdvanceOptions opt;
  opt.k = k;
  opt.steps = std::lround(final_time / tau);
  advance(disc, model, state, opt);
  const double t = state.t;
  return error_norms(*space, state.current(), [t](const Point& x) { return std::cos(pi * x[0]) * std::exp(-t); }).l2;
}

TEST(BdfConsistency, TemporalOrderMatchesTheBdfOrder) {
  for (int k : {1, 2}) {
    const double e1 = temporal_error(k, 4e-3, 0.2);
    const double e2 = temporal_error(k, 2e-3, 0.2);
    const double e3 = temporal_error(k, 1e-3, 0.2);
    const double r1 = std::log2(e1 / e2), r2 = std::log2(e2 / e3);
    EXPECT_GE(r2, k - 0.2) << "k = " << k << " errors " << e1 << " " << e2 << " " << e3;
    EXPECT_GE(r1, k - 0.3) << "k = " << k;
  }
}

SavConfig double_well() {
  SavConfig sav;
  sav.potential = [](double v) { return 0.25 * (v * v - 1.0) * (v * v - 1.0); };
  sav.derivative = [](double v) { return v * v * v - v; };
  sav.c0 = 1.0;
  return sav;
}

TEST(StepSav, FirstOrderModifiedEnergyIsMonotone) {
  const auto space = build_space(Mesh::interval(0.0, 2.0 * pi, 32), 1);
  const Discretization disc(space);
  ParabolicModel model;
  model.kind = SchemeKind::sav;
  model.mobility = [](double v, const Point&, double) { return std::max(1.0 - v * v, 0.0) + 0.01; };
  model.sav = double_well();
  model.kappa = 1.0;
  model.bounds = BoundsSchedule::fixed(-1.0, 1.0, 0.0);
  const NodalVector u0 =
      interpolate(*space, [](const Point& x) { return 0.5 * std::cos(x[0]) + 0.3 * std::cos(3.0 * x[0]); });
  TimeState state = start_state(disc, model, u0, 0.0, 1e-3);
  const Diagnostics d0 = diagnostics(disc, u0, 0.0, 1.0, &*model.sav, state.r_history.front());
  ASSERT_TRUE(d0.modified_energy.has_value());
  double previous = *d0.modified_energy;
  AdvanceOptions opt;
  opt.k = 1;
  opt.steps = 50;
  int n = 0;
  advance(disc, model, state, opt, [&](const TimeState& s, const StepInfo&) {
    ++n;
    const Diagnostics d = diagnostics(disc, s.current(), s.t, 1.0, &*model.sav, s.r_history.front());
    EXPECT_LE(*d.modified_energy, previous + 1e-10 * *d0.modified_energy) << "step " << n;
    previous = *d.modified_energy;
  });
  EXPECT_EQ(n, 50);
}

TEST(StepSav, ScalarRelationHoldsEveryStep) {
  const auto space = build_space(Mesh::interval(0.0, 2.0 * pi, 24), 2);
  const Discretization disc(space);
  ParabolicModel model;
  model.kind = SchemeKind::sav;
  model.mobility = [](double, const Point&, double) { return 1.0; };
  model.sav = double_well();
  model.bounds = BoundsSchedule::fixed(-1.0, 1.0, 0.0);
  TimeState state =
      start_state(disc, model, interpolate(*space, [](const Point& x) { return 0.6 * std::cos(x[0]); }), 0.0, 1e-2);
  for (int n = 0; n < 8; ++n) {
    const BdfTable tbl = bdf_table(std::min<int>(2, static_cast<int>(state.history.size())));
    const ViProblem prob = build_step_problem(disc, model, state, tbl);
    ASSERT_TRUE(prob.sav.has_value());
    step(disc, model, state, tbl, PdasConfig{}, 2);
    const SavCoupling& c = *prob.sav;
    const double lhs = c.alpha * state.r_history.front() - c.r_hist;
    const double rhs = c.d.dot(c.alpha * state.current() - c.u_hist);
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (std::abs(lhs) + std::abs(rhs) + std::abs(c.r_hist))) << n;
  }
}

TEST(StepSav, ZeroPotentialReducesToTheFourthOrderScheme) {
  const auto space = build_space(Mesh::interval(0.0, 1.0, 20), 2);
  const Discretization disc(space);
  const StateFunction mob = [](double v, const Point&, double) { return 1.0 + v; };
  ParabolicModel plain = fourth_order_model(mob, BoxBounds{0.0, 1.0, 0.0});
  ParabolicModel sav = plain;
  sav.kind = SchemeKind::sav;
  sav.sav = SavConfig{[](double) { return 0.0; }, [](double) { return 0.0; }, 1.0};
  const NodalVector u0 = interpolate(*space, [](const Point& x) { return 0.5 + 0.3 * std::cos(pi * x[0]); });
  TimeState a = start_state(disc, plain, u0, 0.0, 5e-3);
  TimeState b = start_state(disc, sav, u0, 0.0, 5e-3);
  EXPECT_NEAR(b.r_history.front(), 1.0, 1e-14);
  AdvanceOptions opt;
  opt.k = 2;
  opt.steps = 10;
  advance(disc, plain, a, opt);
  advance(disc, sav, b, opt);
  EXPECT_LE((a.current() - b.current()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(b.r_history.front(), 1.0, 1e-12);
}

TEST(StepSav, NonPositiveEnergyIsRejected) {
  const auto space = unit_interval(8, 1);
  const SavConfig bad{[](double) { return -1.0; }, [](double) { return 0.0; }, 0.5};
  EXPECT_THROW(sav_init(*space, NodalVector::Zero(space->num_dofs()), bad), Error);
}

TEST(StepSecondOrder, ConstantStateIsSteady) {
  const auto space = unit_square(5, 1);
  const Discretization disc(space);
  ParabolicModel model;
  model.kind = SchemeKind::second_order;
  model.mobility = [](double, const Point&, double) { return 1.0; };
  model.bounds = BoundsSchedule::fixed(0.0, 1.0, 0.0);
  TimeState state = start_state(disc, model, NodalVector::Constant(space->num_dofs(), 0.7), 0.0, 0.05);
  AdvanceOptions opt;
  opt.k = 2;
  opt.steps = 4;
  advance(disc, model, state, opt);
  EXPECT_LE((state.current().array() - 0.7).abs().maxCoeff(), 1e-12);
}

TEST(StepSecondOrder, RegularizationUsesTheCellDiameter) {
  const auto space = build_space(Mesh::rectangle({0, 0}, {1, 1}, 4, 4), 2);
  EXPECT_NEAR(regularization_epsilon(*space), std::pow(std::sqrt(2.0) / 4.0, 3), 1e-15);
}

TEST(StepSecondOrder, BoundsAndMassHoldForASteepProfile) {
  const auto space = build_space(Mesh::interval(-1.0, 1.0, 64), 1);
  const Discretization disc(space);
  ParabolicModel model;
  model.kind = SchemeKind::second_order;
  model.mobility = [](double v, const Point&, double) { return 2.0 * std::max(v, 0.0); };
  model.degenerate = true;
  model.bounds = BoundsSchedule::fixed(0.0, 1.0, 0.0);
  const NodalVector u0 = interpolate(*space, [](const Point& x) { return std::max(0.0, 1.0 - 4.0 * x[0] * x[0]); });
  TimeState state = start_state(disc, model, u0, 0.0, 2e-3);
  const double m0 = disc.integral(u0);
  AdvanceOptions opt;
  opt.k = 2;
  opt.steps = 30;
  advance(disc, model, state, opt, [&](const TimeState& s, const StepInfo&) {
    EXPECT_GE(s.current().minCoeff(), 0.0);
    EXPECT_LE(s.current().maxCoeff(), 1.0);
    EXPECT_LE(std::abs(disc.integral(s.current()) - m0), 1e-10 * (1.0 + m0));
  });
}

TEST(SolveStationary, ConstantDataGivesConstantSolution) {
  const auto space = unit_square(4, 2);
  const Discretization disc(space);
  const StationaryResult res =
      solve_stationary(disc, Coefficient::constant(0.25), Coefficient::constant(0.0), Coefficient::constant(1.0),
                       Coefficient::constant(1.0), BoxBounds{0.0, 1.0, 0.0}, PdasConfig{});
  EXPECT_LE((res.solution.u.array() - 0.25).abs().maxCoeff(), 1e-12);
  EXPECT_NEAR(res.target_mass, 0.25, 1e-14);
}

TEST(SolveStationary, RejectsDataWhoseMeanLeavesTheBox) {
  const auto space = unit_interval(10, 1);
  const Discretization disc(space);
  EXPECT_THROW(solve_stationary(disc, Coefficient::constant(1.5), Coefficient::constant(0.0),
                                Coefficient::constant(1.0), Coefficient::constant(1.0), BoxBounds{0.0, 1.0, 0.0},
                                PdasConfig{}),
               Error);
}

TEST(InitVi, ConstantIsReproduced) {
  const auto space = unit_interval(12, 2);
  const Discretization disc(space);
  const NodalVector u = init_vi(disc, [](const Point&) { return 0.6; }, [](const Point&) { return 0.0; },
                                BoxBounds{0.0, 1.0, 0.0});
  EXPECT_LE((u.array() - 0.6).abs().maxCoeff(), 1e-12);
}

TEST(InitVi, CosineHasZeroMassAndStaysInTheBox) {
  const auto space = build_space(Mesh::interval(0.0, 2.0 * pi, 32), 1);
  const Discretization disc(space);
  const NodalVector u = init_vi(disc, [](const Point& x) { return std::cos(x[0]); },
                                [](const Point& x) { return std::cos(x[0]); }, BoxBounds{-1.0, 1.0, 0.0});
  EXPECT_NEAR(disc.integral(u), 0.0, 1e-10);
  EXPECT_GE(u.minCoeff(), -1.0);
  EXPECT_LE(u.maxCoeff(), 1.0);
}

TEST(InitVi, DistanceToTheInterpolantDecaysAtOrderPPlusOne) {
  for (int p : {1, 2}) {
    std::vector<std::pair<double, double>> errs;
    for (int cells : {8, 16, 32}) {
      const auto space = build_space(Mesh::interval(0.0, 2.0 * pi, cells), p);
      const Discretization disc(space);
      const auto u0 = [](const Point& x) { return 0.5 + 0.3 * std::cos(x[0]); };
      const NodalVector u =
          init_vi(disc, u0, [](const Point& x) { return 0.3 * std::cos(x[0]); }, BoxBounds{0.0, 1.0, 0.0});
      const NodalVector diff = u - interpolate(*space, u0);
      errs.emplace_back(space->mesh().diameter(), std::sqrt(diff.dot(disc.mass() * diff)));
    }
    const auto rates = eoc(errs);
    EXPECT_GE(rates.back(), p + 1 - 0.2) << "p = " << p;
  }
}

// Dense projected gradient for min (v - t)^T M (v - t) over box and mass.
NodalVector dense_projection_oracle(const Eigen::MatrixXd& m, const NodalVector& t, const BoxBounds& b) {
  const Vector w = m * Vector::Ones(t.size());
  const double mass = w.dot(t);
  auto project = [&](const Vector& y) {
    double lo = -1e3, hi = 1e3;
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vector v = (y + mid * w).cwiseMax(b.lower).cwiseMin(b.upper);
      (w.dot(v) < mass ? lo : hi) = mid;
    }
    return Vector((y + 0.5 * (lo + hi) * w).cwiseMax(b.lower).cwiseMin(b.upper));
  };
  const double step = 1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().maxCoeff();
  Vector v = project(t);
  for (int it = 0; it < 20000; ++it) v = project(v - step * (m * (v - t)));
  return v;
}

TEST(InitPostprocess, FeasibleInputIsUnchanged) {
  const auto space = unit_interval(10, 2);
  const Discretization disc(space);
  const NodalVector t = interpolate(*space, [](const Point& x) { return 0.2 + 0.5 * x[0]; });
  EXPECT_LE((init_postprocess(disc, t, BoxBounds{0.0, 1.0, 0.0}) - t).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(InitPostprocess, SingleNodeViolation) {
  const auto space = unit_interval(2, 1);
  const Discretization disc(space);
  NodalVector t(3);
  t << 1.2, 0.5, 0.5;
  const NodalVector v = init_postprocess(disc, t, BoxBounds{0.0, 1.0, 0.0});
  EXPECT_GE(v.minCoeff(), 0.0);
  EXPECT_LE(v.maxCoeff(), 1.0);
  EXPECT_NEAR(disc.integral(v), disc.integral(t), 1e-12);
  const NodalVector ref = dense_projection_oracle(Eigen::MatrixXd(disc.mass()), t, BoxBounds{0.0, 1.0, 0.0});
  EXPECT_LE((v - ref).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(InitPostprocess, TinyMeshesMatchTheDenseOracle) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> uni(-0.4, 1.4);
  for (int trial = 0; trial < 6; ++trial) {
    const auto space = unit_interval(4 + trial, trial % 2 + 1);
    const Discretization disc(space);
    NodalVector t(space->num_dofs());
    for (Index i = 0; i < t.size(); ++i) t[i] = uni(gen);
    const double mean = disc.integral(t);
    if (mean < 0.05 || mean > 0.95) continue;
    const BoxBounds box{0.0, 1.0, 0.0};
    const NodalVector v = init_postprocess(disc, t, box);
    const NodalVector ref = dense_projection_oracle(Eigen::MatrixXd(disc.mass()), t, box);
    EXPECT_LE((v - ref).cwiseAbs().maxCoeff(), 1e-7) << "trial " << trial;
  }
}

TEST(InitPostprocess, InfeasibleMassIsRejected) {
  const auto space = unit_interval(4, 1);
  const Discretization disc(space);
  EXPECT_THROW(init_postprocess(disc, NodalVector::Constant(5, 1.5), BoxBounds{0.0, 1.0, 0.0}), Error);
}

TEST(SavInit, ClosedForms) {
  const auto space = unit_interval(5, 1);
  const SavConfig zero{[](double) { return 0.0; }, [](double) { return 0.0; }, 1.0};
  EXPECT_NEAR(sav_init(*space, NodalVector::Zero(space->num_dofs()), zero), 1.0, 1e-15);
  const SavConfig square{[](double v) { return v * v; }, [](double v) { return 2.0 * v; }, 0.0};
  EXPECT_NEAR(sav_init(*space, NodalVector::Ones(space->num_dofs()), square), 1.0, 1e-14);
}

TEST(SavInit, MatchesAnIndependentFineQuadrature) {
  const auto space = build_space(Mesh::interval(0.0, 1.0, 7), 2);
  const NodalVector u = testing::random_vector(space->num_dofs(), 21);
  const SavConfig sav = double_well();
  const double r = sav_init(*space, u, sav);
  // Composite midpoint rule on a fine uniform grid of the FE function.
  const int samples = 200000;
  double integral = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double x = (j + 0.5) / samples;
    integral += sav.potential(evaluate(*space, u, {x, 0.0})) / samples;
  }
  EXPECT_NEAR((r * r - sav.c0) / integral, 1.0, 1e-9);
}

TEST(TimeState, PushTrimsHistory) {
  TimeState s;
  s.history.push_back(NodalVector::Zero(2));
  s.push(NodalVector::Ones(2), std::nullopt, 0.1, 2);
  s.push(NodalVector::Constant(2, 2.0), std::nullopt, 0.2, 2);
  EXPECT_EQ(s.history.size(), 2u);
  EXPECT_EQ(s.current()[0], 2.0);
  EXPECT_EQ(s.history.back()[0], 1.0);
  EXPECT_DOUBLE_EQ(s.t, 0.2);
}

TEST(BoundsSchedule, TimeDependentBoxIsEvaluatedAtTheRequestedTime) {
  BoundsSchedule b;
  b.lower = [](double) { return 0.0; };
  b.upper = [](double t) { return 2.0 * std::cos(t); };
  const BoxBounds box = b.at(0.5);
  EXPECT_DOUBLE_EQ(box.upper, 2.0 * std::cos(0.5));
}

}  // namespace
}  // namespace vifem
