// SPDX-License-Identifier: Apache-2.0

#include "vifem/linsolve.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>
#ifdef VIFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

namespace vifem {

namespace {

double inf_norm(const SparseMatrix& a) {
  Vector rows = Vector::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

struct DirectSolver::Impl {
  SparseMatrix a;
  double a_norm = 0.0;
  std::string context;
#ifdef VIFEM_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseMatrix> lu;
#else
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
};

DirectSolver::DirectSolver() = default;
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

DirectSolver::DirectSolver(const SparseMatrix& a, std::string context) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw Error("DirectSolver: matrix is not square");
  impl_->a = a;
  impl_->a.makeCompressed();
  impl_->a_norm = inf_norm(impl_->a);
  impl_->context = std::move(context);
  impl_->lu.compute(impl_->a);
  if (impl_->lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sparse LU failed: matrix of size " << a.rows() << " is numerically singular";
    if (!impl_->context.empty()) msg << " (" << impl_->context << ")";
    throw SingularSystemError(msg.str());
  }
}

Index DirectSolver::size() const { return impl_ ? impl_->a.rows() : 0; }

const char* DirectSolver::backend() {
#ifdef VIFEM_HAVE_UMFPACK
  return "umfpack";
#else
  return "eigen-sparselu";
#endif
}

Vector DirectSolver::solve(const Vector& rhs) const {
  if (!impl_) throw Error("DirectSolver: no matrix factorized");
  if (rhs.size() != impl_->a.rows()) throw Error("DirectSolver: right-hand side has the wrong length");
  Vector x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success || !x.allFinite()) {
    throw SingularSystemError("sparse LU solve failed" +
                              (impl_->context.empty() ? std::string() : " (" + impl_->context + ")"));
  }
  Vector r = rhs - impl_->a * x;
  x += impl_->lu.solve(r);
  r = rhs - impl_->a * x;
  const double scale = impl_->a_norm * x.lpNorm<Eigen::Infinity>() + rhs.lpNorm<Eigen::Infinity>();
  const double res = r.lpNorm<Eigen::Infinity>();
  if (!x.allFinite() || res > 1e-9 * scale) {
    std::ostringstream msg;
    msg << "linear system is singular or too ill-conditioned: backward error " << res / std::max(scale, 1e-300);
    if (!impl_->context.empty()) msg << " (" << impl_->context << ")";
    throw SingularSystemError(msg.str());
  }
  return x;
}

SparseMatrix BlockSystem::assemble() const {
  const Index n1 = a.rows();
  const Index n2 = c.rows();
  const Index nb = static_cast<Index>(borders.size());
  const Index n = n1 + n2 + nb;
  if (a.cols() != n1 || c.cols() != n2) throw Error("BlockSystem: diagonal blocks must be square");
  if (n2 > 0 && (b.rows() != n1 || b.cols() != n2 || bt.rows() != n2 || bt.cols() != n1))
    throw Error("BlockSystem: off-diagonal block shapes do not match");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(a.nonZeros() + b.nonZeros() + bt.nonZeros() + c.nonZeros() + 2 * nb * n);
  auto add = [&](const SparseMatrix& m, Index r0, Index c0, double s) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
        trip.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
  };
  add(a, 0, 0, 1.0);
  if (n2 > 0) {
    add(b, 0, n1, 1.0);
    add(bt, n1, 0, 1.0);
    add(c, n1, n1, -1.0);
  }
  for (Index j = 0; j < nb; ++j) {
    const Border& bd = borders[j];
    const Index idx = n1 + n2 + j;
    if (bd.column.size() != n || bd.row.size() != n)
      throw Error("BlockSystem: border vectors must span the full system");
    for (Index i = 0; i < n; ++i) {
      if (i == idx) continue;
      if (bd.column[i] != 0.0) trip.emplace_back(i, idx, bd.column[i]);
      if (bd.row[i] != 0.0) trip.emplace_back(idx, i, bd.row[i]);
    }
    trip.emplace_back(idx, idx, bd.corner);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

Vector solve(const BlockSystem& sys, const Vector& rhs, const std::string& context) {
  if (rhs.size() != sys.size()) throw Error("solve: right-hand side length does not match the system");
  const DirectSolver solver(sys.assemble(), context);
  return solver.solve(rhs);
}

bool is_mean_free(const NodalVector& load, double tol) {
  return std::abs(load.sum()) <= tol * load.cwiseAbs().sum();
}

namespace {

SparseMatrix bordered(const SparseMatrix& k, const Vector& m) {
  BlockSystem sys;
  sys.a = k;
  Border bd;
  bd.column = Vector::Zero(k.rows() + 1);
  bd.column.head(k.rows()) = m;
  bd.row = bd.column;
  sys.borders.push_back(std::move(bd));
  return sys.assemble();
}

}  // namespace

WeightedPoisson::WeightedPoisson(const FeSpace& space, const Coefficient& mobility)
    : WeightedPoisson(assemble_stiffness(space, mobility), assemble_load(space, Coefficient::constant(1.0))) {}

WeightedPoisson::WeightedPoisson(const SparseMatrix& stiffness, Vector mass_weights)
    : stiffness_(stiffness),
      weights_(std::move(mass_weights)),
      solver_(bordered(stiffness_, weights_), "weighted Poisson with mean constraint") {}

NodalVector WeightedPoisson::apply(const NodalVector& load) const {
  if (load.size() != stiffness_.rows()) throw Error("WeightedPoisson: load has the wrong length");
  if (!is_mean_free(load)) {
    std::ostringstream msg;
    msg << "WeightedPoisson: load is not mean-free (sum " << load.sum() << ", absolute sum "
        << load.cwiseAbs().sum() << ")";
    throw Error(msg.str());
  }
  Vector rhs = Vector::Zero(load.size() + 1);
  rhs.head(load.size()) = load;
  const Vector x = solver_.solve(rhs);
  return x.head(load.size());
}

double WeightedPoisson::norm_sq(const NodalVector& load) const { return load.dot(apply(load)); }

NodalVector h_minus1_apply(const FeSpace& space, const Coefficient& mobility, const NodalVector& load) {
  check_length(space, load, "h_minus1_apply");
  return WeightedPoisson(space, mobility).apply(load);
}

}  // namespace vifem
