// SPDX-License-Identifier: Apache-2.0
//
// Sparse direct solves for bordered block systems and the weighted discrete
// Poisson operator with a mean-zero constraint.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vifem/assembly.hpp"

namespace vifem {

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// LU factorization of a general square sparse matrix. Uses UMFPACK when the
/// build found it, Eigen's SparseLU otherwise. Immutable after construction;
/// solve() is const and re-entrant.
class DirectSolver {
 public:
  DirectSolver();
  /// `context` is appended to error messages (e.g. the active-set summary).
  explicit DirectSolver(const SparseMatrix& a, std::string context = {});
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  /// Solves with one step of iterative refinement. Throws SingularSystemError
  /// if the factorization failed or the backward error exceeds 1e-9.
  Vector solve(const Vector& rhs) const;
  Index size() const;
  static const char* backend();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One extra row and column appended to a system. Both vectors have the
/// length of the full bordered system (so later borders can couple to earlier
/// ones); their entry at the border's own index is ignored and `corner` is
/// used there instead.
struct Border {
  Vector column;
  Vector row;
  double corner = 0.0;
};

/// [[a, b], [bt, -c]] plus trailing borders. Any of b, bt, c may be empty
/// (0x0) when the second block has size zero. bt is not required to be the
/// transpose of b.
struct BlockSystem {
  SparseMatrix a;
  SparseMatrix b;
  SparseMatrix bt;
  SparseMatrix c;
  std::vector<Border> borders;

  Index first_size() const { return a.rows(); }
  Index second_size() const { return c.rows(); }
  Index size() const { return a.rows() + c.rows() + static_cast<Index>(borders.size()); }
  SparseMatrix assemble() const;
};

Vector solve(const BlockSystem& sys, const Vector& rhs, const std::string& context = {});

/// Solver for (M grad z, grad v) = <load, v> with int z = 0, realized with a
/// Lagrange-multiplier row carrying the mass weights int phi_i.
class WeightedPoisson {
 public:
  WeightedPoisson(const FeSpace& space, const Coefficient& mobility);
  WeightedPoisson(const SparseMatrix& stiffness, Vector mass_weights);

  /// Load vector in, mean-free nodal vector out. Rejects loads whose sum
  /// exceeds 1e-10 of their absolute sum.
  NodalVector apply(const NodalVector& load) const;
  /// Discrete H^-1 seminorm squared of a load: load . apply(load).
  double norm_sq(const NodalVector& load) const;
  const SparseMatrix& stiffness() const { return stiffness_; }
  const Vector& mass_weights() const { return weights_; }

 private:
  SparseMatrix stiffness_;
  Vector weights_;
  DirectSolver solver_;
};

NodalVector h_minus1_apply(const FeSpace& space, const Coefficient& mobility, const NodalVector& load);

/// |sum(load)| <= tol * sum|load|.
bool is_mean_free(const NodalVector& load, double tol = 1e-10);

}  // namespace vifem
