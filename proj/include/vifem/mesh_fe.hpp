// SPDX-License-Identifier: Apache-2.0
//
// Structured interval/rectangle meshes and continuous Lagrange spaces of
// order 1..4 with equispaced nodes. In 2D the element is the tensor-product
// (Q_p) element, so the dof grid is (p*nx+1) x (p*ny+1).

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace vifem {

using Index = std::int64_t;
using Point = std::array<double, 2>;
using Gradient = std::array<double, 2>;
using Vector = Eigen::VectorXd;

/// A NodalVector is the coefficient vector of v_h = sum_i V_i phi_i. It is a
/// plain Eigen vector; functions that take one together with a FeSpace check
/// the length.
using NodalVector = Vector;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Mesh {
  int dim = 1;
  Point lower{0.0, 0.0};
  Point upper{1.0, 0.0};
  std::array<int, 2> cells{1, 1};

  static Mesh interval(double lo, double hi, int n);
  static Mesh rectangle(Point lo, Point hi, int nx, int ny);

  double cell_size(int axis) const { return (upper[axis] - lower[axis]) / cells[axis]; }
  /// Largest cell diameter (the mesh size h).
  double diameter() const;
  double measure() const;
  Index num_cells() const { return dim == 1 ? cells[0] : Index{cells[0]} * cells[1]; }
  bool contains(const Point& x, double slack = 1e-12) const;
};

/// Tensor Gauss-Legendre rule on the reference cell [0,1]^dim.
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

/// n-point Gauss-Legendre rule on [0,1], exact for degree 2n-1.
QuadratureRule gauss_legendre(int n);
QuadratureRule tensor_gauss(int dim, int n_per_axis);

/// Points per axis used for assembly: exact to degree 2p+3 per axis and to
/// degree 3p, so that basis products times a degree-p coefficient are exact.
inline int assembly_points(int order) { return std::max(order + 2, (3 * order + 2) / 2); }

/// Values and reference gradients of the local basis tabulated at the points
/// of a quadrature rule. Index as value(q, i), grad(q, i).
struct Tabulation {
  int n_points = 0;
  int n_local = 0;
  std::vector<double> values;
  std::vector<Gradient> grads;
  double value(int q, int i) const { return values[static_cast<std::size_t>(q) * n_local + i]; }
  const Gradient& grad(int q, int i) const { return grads[static_cast<std::size_t>(q) * n_local + i]; }
};

class FeSpace {
 public:
  FeSpace(Mesh mesh, int order);

  const Mesh& mesh() const { return mesh_; }
  int dim() const { return mesh_.dim; }
  int order() const { return order_; }
  Index num_dofs() const { return static_cast<Index>(coords_.size()); }
  int dofs_per_cell() const { return n_local_; }
  int nodes_per_axis(int axis) const { return nodes_[axis]; }

  const std::vector<Point>& dof_coordinates() const { return coords_; }
  std::span<const Index> cell_dofs(Index cell) const {
    return {cell_dofs_.data() + cell * n_local_, static_cast<std::size_t>(n_local_)};
  }
  /// Lower-left corner of a cell.
  Point cell_origin(Index cell) const;
  /// Dofs on the boundary of the domain (lexicographic order).
  std::vector<Index> boundary_dofs() const;

  /// Local basis on the reference cell; local index i = iy*(p+1) + ix.
  double shape_value(int i, const Point& ref) const;
  Gradient shape_grad(int i, const Point& ref) const;
  Tabulation tabulate(const QuadratureRule& rule) const;

  /// Maps a physical point to (cell, reference coordinates). Points on a
  /// shared facet go to the cell with the larger index unless prefer_lower.
  Index locate(const Point& x, Point& ref, bool prefer_lower = false) const;
  Point to_physical(Index cell, const Point& ref) const;

 private:
  Mesh mesh_;
  int order_;
  int n_local_;
  std::array<int, 2> nodes_{1, 1};
  std::vector<Point> coords_;
  std::vector<Index> cell_dofs_;
};

/// Rejects orders outside 1..4.
std::shared_ptr<const FeSpace> build_space(const Mesh& mesh, int order);

using ScalarField = std::function<double(const Point&)>;

NodalVector interpolate(const FeSpace& space, const ScalarField& g);

double evaluate(const FeSpace& space, const NodalVector& v, const Point& x);
Gradient evaluate_gradient(const FeSpace& space, const NodalVector& v, const Point& x);
double evaluate_in_cell(const FeSpace& space, const NodalVector& v, Index cell, const Point& ref);

void check_length(const FeSpace& space, const NodalVector& v, const char* what);

}  // namespace vifem
