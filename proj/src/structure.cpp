// SPDX-License-Identifier: Apache-2.0

#include "vifem/structure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vifem {

Diagnostics diagnostics(const Discretization& disc, const NodalVector& u, double t, double kappa,
                        const SavConfig* sav, std::optional<double> r) {
  check_length(disc.space(), u, "diagnostics");
  Diagnostics d;
  d.t = t;
  d.mass = disc.integral(u);
  d.min = u.minCoeff();
  d.max = u.maxCoeff();
  d.dirichlet_energy = 0.5 * kappa * u.dot(disc.laplace() * u);
  if (sav) {
    d.e1 = potential_energy(disc.space(), u, *sav);
    const double rr = r ? *r : std::sqrt(std::max(*d.e1, 0.0));
    d.modified_energy = d.dirichlet_energy + rr * rr;
  }
  return d;
}

namespace {

Point cell_point(const FeSpace& space, Index cell, const Point& ref) { return space.to_physical(cell, ref); }

// Sampled sup-norm of a nodal function: per-cell equispaced grid with
// (p+3) points per axis, plus the nodal values.
double sampled_sup(const FeSpace& space, const NodalVector& v) {
  const int n = space.order() + 3;
  QuadratureRule grid;
  for (int j = 0; j < (space.dim() == 2 ? n : 1); ++j)
    for (int i = 0; i < n; ++i) {
      grid.points.push_back({static_cast<double>(i) / (n - 1), space.dim() == 2 ? static_cast<double>(j) / (n - 1) : 0.0});
      grid.weights.push_back(1.0);
    }
  const Tabulation tab = space.tabulate(grid);
  double sup = v.cwiseAbs().maxCoeff();
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < tab.n_points; ++q) {
      double s = 0.0;
      for (int i = 0; i < tab.n_local; ++i) s += v[dofs[i]] * tab.value(q, i);
      sup = std::max(sup, std::abs(s));
    }
  }
  return sup;
}

NodalVector project_core(const FeSpace& space, const ScalarField& v, double mean, const BoxBounds& bounds,
                         ProjectionReport* report) {
  bounds.validate();
  if (!std::isfinite(bounds.lower) || !std::isfinite(bounds.upper))
    throw Error("bp_mc_project: the box must be bounded");
  const double center = 0.5 * (bounds.lower + bounds.upper);
  const double half = 0.5 * (bounds.upper - bounds.lower);
  const Vector weights = assemble_load(space, Coefficient::constant(1.0));
  const double measure = weights.sum();

  NodalVector tilde = interpolate(space, v).array() - center;
  const double mbar = mean - center;
  const double c1 = mbar - weights.dot(tilde) / measure;
  tilde.array() += c1;

  ProjectionReport rep;
  rep.mean = mean;
  rep.c1 = c1;
  if (tilde.cwiseAbs().maxCoeff() > half) {
    rep.sup_norm = sampled_sup(space, tilde);
    const double c2 = (rep.sup_norm - half) / (rep.sup_norm - std::abs(mbar));
    rep.c2 = c2;
    rep.blended = true;
    if (!(c2 > 0.0 && c2 < 1.0)) {
      std::ostringstream msg;
      msg << "bp_mc_project: blending weight c2 = " << c2
          << " is outside (0, 1); the mesh is too coarse for this input";
      throw Error(msg.str());
    }
    tilde = (1.0 - c2) * tilde.array() + c2 * mbar;
  }
  if (report) *report = rep;
  NodalVector out = tilde.array() + center;
  for (Index i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], bounds.lower, bounds.upper);
  return out;
}

}  // namespace

NodalVector bp_mc_project(const FeSpace& space, const ScalarField& v, const BoxBounds& bounds,
                          ProjectionReport* report) {
  const double integral = assemble_load(space, v, 4).sum();
  return project_core(space, v, integral / space.mesh().measure(), bounds, report);
}

NodalVector bp_mc_project(const FeSpace& space, const FeSpace& source_space, const NodalVector& v,
                          const BoxBounds& bounds, ProjectionReport* report) {
  check_length(source_space, v, "bp_mc_project");
  const double mean = integrate(source_space, v) / source_space.mesh().measure();
  const ScalarField fn = [&source_space, &v](const Point& x) { return evaluate(source_space, v, x); };
  return project_core(space, fn, mean, bounds, report);
}

std::vector<double> eoc(const std::vector<std::pair<double, double>>& errors) {
  if (errors.size() < 2) throw Error("eoc: need at least two (h, error) pairs");
  std::vector<double> rates;
  for (std::size_t j = 0; j < errors.size(); ++j) {
    const auto [h, e] = errors[j];
    if (!(e > 0.0) || !std::isfinite(e)) throw Error("eoc: errors must be positive and finite");
    if (!(h > 0.0)) throw Error("eoc: mesh sizes must be positive");
    if (j > 0 && !(h < errors[j - 1].first)) throw Error("eoc: mesh sizes must be strictly decreasing");
  }
  for (std::size_t j = 0; j + 1 < errors.size(); ++j)
    rates.push_back(std::log(errors[j].second / errors[j + 1].second) /
                    std::log(errors[j].first / errors[j + 1].first));
  return rates;
}

namespace {

ErrorNorms finish(double e0, double e1, double n0, double n1) {
  ErrorNorms out;
  out.l2_abs = std::sqrt(e0);
  out.h1_abs = std::sqrt(e1);
  if (n0 > 0.0) {
    out.l2 = out.l2_abs / std::sqrt(n0);
    out.h1 = n1 > 0.0 ? out.h1_abs / std::sqrt(n1) : out.h1_abs;
  } else {
    out.absolute = true;
    out.l2 = out.l2_abs;
    out.h1 = out.h1_abs;
  }
  return out;
}

}  // namespace

ErrorNorms error_norms(const FeSpace& space, const NodalVector& uh, const ScalarField& exact,
                       const GradientField& grad) {
  check_length(space, uh, "error_norms");
  const int dim = space.dim();
  const QuadratureRule rule = tensor_gauss(dim, assembly_points(space.order()) + 2);
  const Tabulation tab = space.tabulate(rule);
  const double hx = space.mesh().cell_size(0);
  const double hy = dim == 2 ? space.mesh().cell_size(1) : 1.0;
  double e0 = 0, e1 = 0, n0 = 0, n1 = 0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < tab.n_points; ++q) {
      const Point x = cell_point(space, c, rule.points[q]);
      const double w = rule.weights[q] * hx * hy;
      double val = 0.0;
      Gradient g{0.0, 0.0};
      for (int i = 0; i < tab.n_local; ++i) {
        val += uh[dofs[i]] * tab.value(q, i);
        g[0] += uh[dofs[i]] * tab.grad(q, i)[0] / hx;
        if (dim == 2) g[1] += uh[dofs[i]] * tab.grad(q, i)[1] / hy;
      }
      const double ex = exact(x);
      e0 += w * (val - ex) * (val - ex);
      n0 += w * ex * ex;
      if (grad) {
        const Gradient ge = grad(x);
        for (int d = 0; d < dim; ++d) {
          e1 += w * (g[d] - ge[d]) * (g[d] - ge[d]);
          n1 += w * ge[d] * ge[d];
        }
      }
    }
  }
  return finish(e0, e1, n0, n1);
}

ErrorNorms reference_error(const FeSpace& space, const NodalVector& uh, const FeSpace& ref_space,
                           const NodalVector& ref) {
  check_length(space, uh, "reference_error");
  check_length(ref_space, ref, "reference_error");
  if (space.dim() != ref_space.dim()) throw Error("reference_error: dimension mismatch");
  const int dim = ref_space.dim();
  const QuadratureRule rule = tensor_gauss(dim, assembly_points(std::max(space.order(), ref_space.order())) + 2);
  const Tabulation tab = ref_space.tabulate(rule);
  const double hx = ref_space.mesh().cell_size(0);
  const double hy = dim == 2 ? ref_space.mesh().cell_size(1) : 1.0;
  double e0 = 0, e1 = 0, n0 = 0, n1 = 0;
  for (Index c = 0; c < ref_space.mesh().num_cells(); ++c) {
    const auto dofs = ref_space.cell_dofs(c);
    for (int q = 0; q < tab.n_points; ++q) {
      const Point x = cell_point(ref_space, c, rule.points[q]);
      const double w = rule.weights[q] * hx * hy;
      double val = 0.0;
      Gradient g{0.0, 0.0};
      for (int i = 0; i < tab.n_local; ++i) {
        val += ref[dofs[i]] * tab.value(q, i);
        g[0] += ref[dofs[i]] * tab.grad(q, i)[0] / hx;
        if (dim == 2) g[1] += ref[dofs[i]] * tab.grad(q, i)[1] / hy;
      }
      const double vh = evaluate(space, uh, x);
      const Gradient gh = evaluate_gradient(space, uh, x);
      e0 += w * (vh - val) * (vh - val);
      n0 += w * val * val;
      for (int d = 0; d < dim; ++d) {
        e1 += w * (gh[d] - g[d]) * (gh[d] - g[d]);
        n1 += w * g[d] * g[d];
      }
    }
  }
  return finish(e0, e1, n0, n1);
}

}  // namespace vifem
