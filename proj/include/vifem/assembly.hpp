// SPDX-License-Identifier: Apache-2.0
//
// Sparse assembly of weighted mass and stiffness matrices and load vectors.

#pragma once

#include <functional>
#include <memory>
#include <variant>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vifem/mesh_fe.hpp"

namespace vifem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Matrix2 = Eigen::Matrix2d;

/// A coefficient sampled at quadrature points. It is one of a constant, a
/// scalar function of (x, t), a symmetric 2x2 matrix function of (x, t), or a
/// nodal field on the assembly space passed through an optional value map
/// (used for state-dependent coefficients such as a mobility M(u)).
class Coefficient {
 public:
  using ScalarFn = std::function<double(const Point&, double)>;
  using MatrixFn = std::function<Matrix2(const Point&, double)>;
  using ValueMap = std::function<double(double, const Point&, double)>;

  struct Field {
    NodalVector values;
    ValueMap map;
  };

  Coefficient() = default;

  static Coefficient constant(double c);
  static Coefficient scalar(ScalarFn fn);
  static Coefficient matrix(MatrixFn fn);
  /// The field is interpolated with the basis of the space it is assembled on.
  /// An empty map means the identity.
  static Coefficient field(NodalVector values, ValueMap map = {});

  /// Copy evaluated at time t.
  Coefficient at_time(double t) const;
  /// Copy that accepts zero samples (degenerate mobilities). Negative samples
  /// are still rejected when positivity is required.
  Coefficient degenerate(bool allow = true) const;

  double time() const { return t_; }
  bool allows_degenerate() const { return allow_degenerate_; }
  bool is_matrix() const { return std::holds_alternative<MatrixFn>(kind_); }
  bool is_constant() const { return std::holds_alternative<double>(kind_); }

  /// Scalar value at a point in a cell. For fields, `basis_values` holds the
  /// local shape-function values at that point.
  double scalar_value(const FeSpace& space, Index cell, const double* basis_values,
                      const Point& x) const;
  Matrix2 matrix_value(const Point& x) const;

 private:
  std::variant<double, ScalarFn, MatrixFn, Field> kind_{1.0};
  double t_ = 0.0;
  bool allow_degenerate_ = false;
};

/// A_ij = int weight * phi_i * phi_j. The weight must be positive (or
/// non-negative if it allows degeneracy).
SparseMatrix assemble_mass(const FeSpace& space, const Coefficient& weight = Coefficient::constant(1.0),
                           int extra_points = 0);

/// A_ij = int coeff grad(phi_i) . grad(phi_j).
SparseMatrix assemble_stiffness(const FeSpace& space,
                                const Coefficient& coeff = Coefficient::constant(1.0),
                                int extra_points = 0);

/// b_i = int g * phi_i. No sign restriction on g.
NodalVector assemble_load(const FeSpace& space, const Coefficient& g, int extra_points = 0);

/// Convenience overload for a function of x only.
NodalVector assemble_load(const FeSpace& space, const ScalarField& g, int extra_points = 0);

/// Integral of the FE function with coefficients v.
double integrate(const FeSpace& space, const NodalVector& v);

/// Entry-wise |A_ij - A_ji| <= tol * max|A|.
bool is_symmetric(const SparseMatrix& a, double tol = 1e-13);

}  // namespace vifem
