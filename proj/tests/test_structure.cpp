// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vifem/structure.hpp"

namespace vifem {
namespace {

using std::numbers::pi;

// Composite Gauss rule with many cells, independent of the FE assembly path.
double fine_integral(const std::function<double(double)>& f, double a, double b, int pieces = 4000) {
  static const double nodes[] = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
  static const double weights[] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double h = (b - a) / pieces;
  double s = 0.0;
  for (int j = 0; j < pieces; ++j) {
    const double mid = a + (j + 0.5) * h;
    for (int q = 0; q < 3; ++q) s += 0.5 * h * weights[q] * f(mid + 0.5 * h * nodes[q]);
  }
  return s;
}

TEST(Projection, ConstantIsUnchanged) {
  const auto space = testing::unit_square(4, 2);
  ProjectionReport rep;
  const NodalVector out = bp_mc_project(*space, [](const Point&) { return 0.3; }, BoxBounds{0.0, 1.0, 0.0}, &rep);
  EXPECT_LE((out.array() - 0.3).abs().maxCoeff(), 1e-13);
  EXPECT_FALSE(rep.blended);
}

TEST(Projection, InteriorInputIsOnlyShifted) {
  const auto space = build_space(Mesh::interval(0.0, 1.0, 10), 2);
  const auto v = [](const Point& x) { return 0.5 + 0.2 * std::sin(3.0 * x[0]); };
  ProjectionReport rep;
  const NodalVector out = bp_mc_project(*space, v, BoxBounds{0.0, 1.0, 0.0}, &rep);
  EXPECT_FALSE(rep.blended);
  const NodalVector expected = interpolate(*space, v).array() + rep.c1;
  EXPECT_LE((out - expected).cwiseAbs().maxCoeff(), 1e-14);
  const double exact = fine_integral([](double x) { return 0.5 + 0.2 * std::sin(3.0 * x); }, 0.0, 1.0);
  EXPECT_NEAR(integrate(*space, out), exact, 1e-11);
}

TEST(Projection, CosineOnSymmetricIntervalKeepsZeroMass) {
  const auto space = build_space(Mesh::interval(-1.0, 1.0, 16), 1);
  const NodalVector out =
      bp_mc_project(*space, [](const Point& x) { return std::cos(pi * x[0]); }, BoxBounds{-1.0, 1.0, 0.0});
  EXPECT_NEAR(integrate(*space, out), 0.0, 1e-12);
  EXPECT_GE(out.minCoeff(), -1.0);
  EXPECT_LE(out.maxCoeff(), 1.0);
}

TEST(Projection, BoundaryTouchingInputTriggersBlending) {
  const auto space = build_space(Mesh::interval(0.0, 1.0, 12), 1);
  const auto v = [](const Point& x) { return std::sin(pi * x[0]); };
  ProjectionReport rep;
  const NodalVector out = bp_mc_project(*space, v, BoxBounds{0.0, 1.0, 0.0}, &rep);
  ASSERT_TRUE(rep.blended);
  EXPECT_GT(rep.c2, 0.0);
  EXPECT_LT(rep.c2, 1.0);
  EXPECT_GE(out.minCoeff(), 0.0);
  EXPECT_LE(out.maxCoeff(), 1.0);
  EXPECT_NEAR(integrate(*space, out), 2.0 / pi, 1e-11);
}

TEST(Projection, DistanceToTheInterpolantShrinks) {
  for (int p : {1, 2}) {
    double previous = 1e300;
    for (int cells : {8, 16, 32}) {
      const auto space = build_space(Mesh::rectangle({0, 0}, {1, 1}, cells, cells), p);
      const auto v = [](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
      const NodalVector out = bp_mc_project(*space, v, BoxBounds{0.0, 1.0, 0.0});
      const double dist = (out - interpolate(*space, v)).cwiseAbs().maxCoeff();
      EXPECT_LT(dist, previous) << "p " << p << " cells " << cells;
      previous = dist;
      EXPECT_GE(out.minCoeff(), 0.0);
      EXPECT_LE(out.maxCoeff(), 1.0);
      EXPECT_NEAR(integrate(*space, out), 4.0 / (pi * pi), 1e-11);
    }
  }
}

TEST(Projection, CoarseMeshWithExtremeInputReportsFailure) {
  const auto space = build_space(Mesh::interval(0.0, 1.0, 1), 1);
  EXPECT_THROW(bp_mc_project(*space, [](const Point& x) { return x[0] < 0.5 ? 1.0 : 1.0 - 1e-3 * x[0]; },
                             BoxBounds{0.0, 1.0 - 1e-3, 0.0}),
               Error);
}

TEST(Projection, FromAFinerSpacePreservesMass) {
  const auto fine = build_space(Mesh::interval(0.0, 1.0, 64), 2);
  const auto coarse = build_space(Mesh::interval(0.0, 1.0, 16), 1);
  const NodalVector v = interpolate(*fine, [](const Point& x) { return 0.5 + 0.45 * std::cos(2 * pi * x[0]); });
  const NodalVector out = bp_mc_project(*coarse, *fine, v, BoxBounds{0.0, 1.0, 0.0});
  EXPECT_NEAR(integrate(*coarse, out), integrate(*fine, v), 1e-12);
  EXPECT_GE(out.minCoeff(), 0.0);
  EXPECT_LE(out.maxCoeff(), 1.0);
}

TEST(Diagnostics, ConstantState) {
  const Discretization disc(testing::unit_square(3, 2));
  const Diagnostics d = diagnostics(disc, NodalVector::Constant(disc.space().num_dofs(), 0.7), 1.5);
  EXPECT_NEAR(d.dirichlet_energy, 0.0, 1e-14);
  EXPECT_EQ(d.min, 0.7);
  EXPECT_EQ(d.max, 0.7);
  EXPECT_NEAR(d.mass, 0.7, 1e-14);
  EXPECT_EQ(d.t, 1.5);
}

TEST(Diagnostics, CheckerboardCosineHasZeroMass) {
  const Discretization disc(testing::unit_square(16, 2));
  const NodalVector u =
      interpolate(disc.space(), [](const Point& x) { return std::cos(4 * pi * x[0]) * std::cos(4 * pi * x[1]); });
  EXPECT_NEAR(diagnostics(disc, u, 0.0).mass, 0.0, 1e-10);
}

TEST(Diagnostics, DoubleWellEnergyAtZero) {
  const Discretization disc(testing::unit_square(2, 1));
  const SavConfig sav{[](double v) { return 0.25 * (v * v - 1) * (v * v - 1); }, [](double v) { return v * v * v - v; },
                      1.0};
  const Diagnostics d = diagnostics(disc, NodalVector::Zero(disc.space().num_dofs()), 0.0, 1.0, &sav, 1.5);
  ASSERT_TRUE(d.e1.has_value());
  EXPECT_NEAR(*d.e1, 1.25, 1e-14);
  ASSERT_TRUE(d.modified_energy.has_value());
  EXPECT_NEAR(*d.modified_energy, 2.25, 1e-14);
}

TEST(Diagnostics, DirichletEnergyOfALinear) {
  const Discretization disc(testing::unit_square(4, 1));
  const NodalVector u = interpolate(disc.space(), [](const Point& x) { return 3.0 * x[0] + 4.0 * x[1]; });
  EXPECT_NEAR(diagnostics(disc, u, 0.0, 0.5).dirichlet_energy, 0.25 * 25.0, 1e-12);
}

TEST(Diagnostics, MassAgreesWithTheLoadVector) {
  const auto space = build_space(Mesh::rectangle({0, 0}, {2, 1}, 5, 3), 3);
  const Discretization disc(space);
  const NodalVector u = testing::random_vector(space->num_dofs(), 31);
  const Vector ones_load = assemble_load(*space, Coefficient::constant(1.0));
  EXPECT_NEAR(diagnostics(disc, u, 0.0).mass, ones_load.dot(u), 1e-12);
}

TEST(Eoc, ExactPowerLaws) {
  std::vector<std::pair<double, double>> quad, lin;
  for (double h : {0.4, 0.2, 0.1, 0.05}) {
    quad.emplace_back(h, 3.0 * h * h);
    lin.emplace_back(h, 0.5 * h);
  }
  for (double r : eoc(quad)) EXPECT_NEAR(r, 2.0, 1e-12);
  for (double r : eoc(lin)) EXPECT_NEAR(r, 1.0, 1e-12);
  const auto single = eoc({{0.1, 1e-2}, {0.05, 2.5e-3}});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_NEAR(single[0], 2.0, 1e-12);
}

TEST(Eoc, InvariantUnderScaling) {
  const std::vector<std::pair<double, double>> e = {{0.3, 0.7}, {0.2, 0.31}, {0.1, 0.11}};
  std::vector<std::pair<double, double>> scaled;
  for (auto [h, v] : e) scaled.emplace_back(h, 17.0 * v);
  const auto a = eoc(e), b = eoc(scaled);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Eoc, RejectsBadInput) {
  EXPECT_THROW(eoc({{0.1, 1.0}}), Error);
  EXPECT_THROW(eoc({{0.1, 1.0}, {0.05, 0.0}}), Error);
  EXPECT_THROW(eoc({{0.1, 1.0}, {0.05, -1.0}}), Error);
  EXPECT_THROW(eoc({{0.1, 1.0}, {0.2, 0.5}}), Error);
}

TEST(ErrorNorms, InterpolantOfSmoothFunctionConvergesQuadratically) {
  std::vector<std::pair<double, double>> errs;
  const auto u = [](const Point& x) { return std::sin(2.0 * x[0]) * std::exp(x[1]); };
  for (int cells : {4, 8, 16, 32}) {
    const auto space = testing::unit_square(cells, 1);
    errs.emplace_back(space->mesh().diameter(), error_norms(*space, interpolate(*space, u), u).l2);
  }
  for (double r : eoc(errs)) EXPECT_NEAR(r, 2.0, 0.1);
}

TEST(ErrorNorms, ExactForFunctionsInTheSpace) {
  const auto space = testing::unit_square(3, 2);
  const auto u = [](const Point& x) { return 1.0 + x[0] * x[1] - x[1] * x[1]; };
  const GradientField g = [](const Point& x) { return Gradient{x[1], x[0] - 2.0 * x[1]}; };
  const ErrorNorms e = error_norms(*space, interpolate(*space, u), u, g);
  EXPECT_LE(e.l2, 1e-13);
  EXPECT_LE(e.h1, 1e-13);
  EXPECT_FALSE(e.absolute);
}

TEST(ErrorNorms, ZeroExactSolutionGivesAbsoluteNorms) {
  const auto space = testing::unit_interval(4, 1);
  const NodalVector uh = NodalVector::Constant(space->num_dofs(), 0.5);
  const ErrorNorms e = error_norms(*space, uh, [](const Point&) { return 0.0; });
  EXPECT_TRUE(e.absolute);
  EXPECT_NEAR(e.l2, 0.5, 1e-14);
}

TEST(ErrorNorms, ClosedFormRelativeError) {
  const auto space = testing::unit_interval(2, 1);
  const NodalVector uh = NodalVector::Constant(space->num_dofs(), 1.5);
  const ErrorNorms e = error_norms(*space, uh, [](const Point&) { return 1.0; });
  EXPECT_NEAR(e.l2, 0.5, 1e-14);
  EXPECT_NEAR(e.l2_abs, 0.5, 1e-14);
}

TEST(ReferenceError, AgreesWithExactErrorForAFineReference) {
  const auto u = [](const Point& x) { return std::cos(pi * x[0]); };
  const auto coarse = build_space(Mesh::interval(0.0, 1.0, 8), 1);
  const auto fine = build_space(Mesh::interval(0.0, 1.0, 256), 3);
  const NodalVector uh = interpolate(*coarse, u);
  const ErrorNorms by_ref = reference_error(*coarse, uh, *fine, interpolate(*fine, u));
  const ErrorNorms exact = error_norms(*coarse, uh, u);
  EXPECT_NEAR(by_ref.l2 / exact.l2, 1.0, 1e-4);
}

TEST(ReferenceError, IdenticalSpacesGiveZero) {
  const auto space = testing::unit_square(3, 2);
  const NodalVector v = testing::random_vector(space->num_dofs(), 41, 0.5, 1.5);
  EXPECT_LE(reference_error(*space, v, *space, v).l2, 1e-14);
}

}  // namespace
}  // namespace vifem
