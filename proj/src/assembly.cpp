// SPDX-License-Identifier: Apache-2.0

#include "vifem/assembly.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace vifem {

Coefficient Coefficient::constant(double c) {
  if (!std::isfinite(c)) throw Error("Coefficient::constant: value is not finite");
  Coefficient k;
  k.kind_ = c;
  return k;
}

Coefficient Coefficient::scalar(ScalarFn fn) {
  if (!fn) throw Error("Coefficient::scalar: empty function");
  Coefficient k;
  k.kind_ = std::move(fn);
  return k;
}

Coefficient Coefficient::matrix(MatrixFn fn) {
  if (!fn) throw Error("Coefficient::matrix: empty function");
  Coefficient k;
  k.kind_ = std::move(fn);
  return k;
}

Coefficient Coefficient::field(NodalVector values, ValueMap map) {
  if (!values.allFinite()) throw Error("Coefficient::field: nodal values are not finite");
  Coefficient k;
  k.kind_ = Field{std::move(values), std::move(map)};
  return k;
}

Coefficient Coefficient::at_time(double t) const {
  Coefficient k = *this;
  k.t_ = t;
  return k;
}

Coefficient Coefficient::degenerate(bool allow) const {
  Coefficient k = *this;
  k.allow_degenerate_ = allow;
  return k;
}

double Coefficient::scalar_value(const FeSpace& space, Index cell, const double* basis_values,
                                 const Point& x) const {
  if (const auto* c = std::get_if<double>(&kind_)) return *c;
  if (const auto* fn = std::get_if<ScalarFn>(&kind_)) return (*fn)(x, t_);
  if (const auto* f = std::get_if<Field>(&kind_)) {
    const auto dofs = space.cell_dofs(cell);
    double v = 0.0;
    for (int i = 0; i < space.dofs_per_cell(); ++i) v += f->values[dofs[i]] * basis_values[i];
    return f->map ? f->map(v, x, t_) : v;
  }
  throw Error("Coefficient: matrix coefficient used where a scalar is required");
}

Matrix2 Coefficient::matrix_value(const Point& x) const {
  if (const auto* fn = std::get_if<MatrixFn>(&kind_)) return (*fn)(x, t_);
  throw Error("Coefficient: scalar coefficient used where a matrix is required");
}

namespace {

struct CellGeometry {
  Point origin;
  double hx, hy, jac;
};

CellGeometry geometry(const FeSpace& space, Index cell) {
  const Mesh& m = space.mesh();
  CellGeometry g;
  g.origin = space.cell_origin(cell);
  g.hx = m.cell_size(0);
  g.hy = m.dim == 2 ? m.cell_size(1) : 1.0;
  g.jac = g.hx * g.hy;
  return g;
}

Point physical(const CellGeometry& g, const Point& ref, int dim) {
  return {g.origin[0] + ref[0] * g.hx, dim == 2 ? g.origin[1] + ref[1] * g.hy : 0.0};
}

void check_sample(double v, bool allow_zero, const Point& x, const char* what) {
  const bool ok = std::isfinite(v) && (allow_zero ? v >= 0.0 : v > 0.0);
  if (!ok) {
    std::ostringstream msg;
    msg << what << ": coefficient sample " << v << " at (" << x[0] << ", " << x[1]
        << ") is not " << (allow_zero ? "non-negative" : "strictly positive");
    throw Error(msg.str());
  }
}

void check_matrix(const Matrix2& k, bool allow_zero, const Point& x) {
  const double scale = k.cwiseAbs().maxCoeff();
  if (!k.allFinite() || std::abs(k(0, 1) - k(1, 0)) > 1e-13 * std::max(scale, 1e-300)) {
    std::ostringstream msg;
    msg << "assemble_stiffness: matrix coefficient at (" << x[0] << ", " << x[1]
        << ") is not symmetric or not finite";
    throw Error(msg.str());
  }
  const double det = k.determinant();
  const double tr = k.trace();
  if (allow_zero ? (det < 0.0 || tr < 0.0) : (det <= 0.0 || tr <= 0.0)) {
    std::ostringstream msg;
    msg << "assemble_stiffness: matrix coefficient at (" << x[0] << ", " << x[1]
        << ") is not positive definite";
    throw Error(msg.str());
  }
}

SparseMatrix from_triplets(const FeSpace& space, std::vector<Eigen::Triplet<double>>& trip) {
  SparseMatrix a(space.num_dofs(), space.num_dofs());
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

}  // namespace

SparseMatrix assemble_mass(const FeSpace& space, const Coefficient& weight, int extra_points) {
  if (weight.is_matrix()) throw Error("assemble_mass: weight must be scalar");
  const int dim = space.dim();
  const QuadratureRule rule = tensor_gauss(dim, assembly_points(space.order()) + extra_points);
  const Tabulation tab = space.tabulate(rule);
  const int nl = space.dofs_per_cell();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(space.mesh().num_cells()) * nl * nl);
  Eigen::MatrixXd local(nl, nl);
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const CellGeometry g = geometry(space, c);
    local.setZero();
    for (int q = 0; q < tab.n_points; ++q) {
      const Point x = physical(g, rule.points[q], dim);
      const double* phi = &tab.values[static_cast<std::size_t>(q) * nl];
      const double wv = weight.scalar_value(space, c, phi, x);
      check_sample(wv, weight.allows_degenerate(), x, "assemble_mass");
      const double s = wv * rule.weights[q] * g.jac;
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) local(i, j) += s * phi[i] * phi[j];
    }
    const auto dofs = space.cell_dofs(c);
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) trip.emplace_back(dofs[i], dofs[j], local(i, j));
  }
  return from_triplets(space, trip);
}

SparseMatrix assemble_stiffness(const FeSpace& space, const Coefficient& coeff, int extra_points) {
  const int dim = space.dim();
  if (coeff.is_matrix() && dim != 2) throw Error("assemble_stiffness: matrix coefficients need a 2D space");
  const QuadratureRule rule = tensor_gauss(dim, assembly_points(space.order()) + extra_points);
  const Tabulation tab = space.tabulate(rule);
  const int nl = space.dofs_per_cell();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(space.mesh().num_cells()) * nl * nl);
  Eigen::MatrixXd local(nl, nl);
  std::vector<Gradient> grads(nl);
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const CellGeometry g = geometry(space, c);
    local.setZero();
    for (int q = 0; q < tab.n_points; ++q) {
      const Point x = physical(g, rule.points[q], dim);
      const double* phi = &tab.values[static_cast<std::size_t>(q) * nl];
      const double s = rule.weights[q] * g.jac;
      for (int i = 0; i < nl; ++i) {
        const Gradient& r = tab.grad(q, i);
        grads[i] = {r[0] / g.hx, dim == 2 ? r[1] / g.hy : 0.0};
      }
      if (coeff.is_matrix()) {
        const Matrix2 k = coeff.matrix_value(x);
        check_matrix(k, coeff.allows_degenerate(), x);
        for (int i = 0; i < nl; ++i) {
          const double kx = k(0, 0) * grads[i][0] + k(0, 1) * grads[i][1];
          const double ky = k(1, 0) * grads[i][0] + k(1, 1) * grads[i][1];
          for (int j = 0; j < nl; ++j) local(i, j) += s * (kx * grads[j][0] + ky * grads[j][1]);
        }
      } else {
        const double kv = coeff.scalar_value(space, c, phi, x);
        check_sample(kv, coeff.allows_degenerate(), x, "assemble_stiffness");
        for (int i = 0; i < nl; ++i)
          for (int j = 0; j < nl; ++j)
            local(i, j) += s * kv * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
      }
    }
    const auto dofs = space.cell_dofs(c);
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) trip.emplace_back(dofs[i], dofs[j], local(i, j));
  }
  return from_triplets(space, trip);
}

NodalVector assemble_load(const FeSpace& space, const Coefficient& gfun, int extra_points) {
  if (gfun.is_matrix()) throw Error("assemble_load: source must be scalar");
  const int dim = space.dim();
  const QuadratureRule rule = tensor_gauss(dim, assembly_points(space.order()) + extra_points);
  const Tabulation tab = space.tabulate(rule);
  const int nl = space.dofs_per_cell();
  NodalVector b = NodalVector::Zero(space.num_dofs());
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const CellGeometry g = geometry(space, c);
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < tab.n_points; ++q) {
      const Point x = physical(g, rule.points[q], dim);
      const double* phi = &tab.values[static_cast<std::size_t>(q) * nl];
      const double gv = gfun.scalar_value(space, c, phi, x);
      if (!std::isfinite(gv)) throw Error("assemble_load: source value is not finite");
      const double s = gv * rule.weights[q] * g.jac;
      for (int i = 0; i < nl; ++i) b[dofs[i]] += s * phi[i];
    }
  }
  return b;
}

NodalVector assemble_load(const FeSpace& space, const ScalarField& g, int extra_points) {
  return assemble_load(space, Coefficient::scalar([g](const Point& x, double) { return g(x); }),
                       extra_points);
}

double integrate(const FeSpace& space, const NodalVector& v) {
  check_length(space, v, "integrate");
  return assemble_load(space, Coefficient::constant(1.0)).dot(v);
}

bool is_symmetric(const SparseMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  double scale = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  const SparseMatrix diff = SparseMatrix(a.transpose()) - a;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst <= tol * scale;
}

}  // namespace vifem
