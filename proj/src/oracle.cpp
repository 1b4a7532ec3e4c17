// SPDX-License-Identifier: Apache-2.0

#include "vifem/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "vifem/assembly.hpp"

namespace vifem::oracle {

namespace {

using Dense = Eigen::MatrixXd;

struct Quadratic {
  Dense h;        // Hessian
  Vector q;       // linear term
  double c = 0.0; // constant
  Vector m;       // mass weights
  double target = 0.0;
};

Quadratic build(const ViProblem& prob) {
  const Index n = prob.size();
  const Dense mass = Dense(prob.mass);
  const Dense stiff = Dense(prob.mobility);
  const Dense primal = Dense(prob.primal);
  Quadratic qd;
  qd.m = mass * Vector::Ones(n);
  qd.target = prob.rhs1.sum() / prob.theta;
  // Pseudo-inverse of the singular weighted stiffness (kernel = constants).
  Eigen::SelfAdjointEigenSolver<Dense> eig(stiff);
  const Vector& lam = eig.eigenvalues();
  const double cut = 1e-10 * lam.cwiseAbs().maxCoeff();
  Dense pinv = Dense::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    if (lam[i] > cut) pinv += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose() / lam[i];
  // Shift rhs1 so that theta*M*v - rhs1 has zero sum on the hyperplane.
  const Vector r = prob.rhs1;
  qd.h = primal + prob.theta * mass * pinv * mass;
  qd.h = 0.5 * (qd.h + qd.h.transpose());
  qd.q = prob.rhs2 - mass * pinv * r;
  qd.c = 0.5 / prob.theta * r.dot(pinv * r);
  return qd;
}

double objective(const Quadratic& qd, const Vector& v) { return 0.5 * v.dot(qd.h * v) + qd.q.dot(v) + qd.c; }

// Euclidean projection onto {lo <= v <= hi, m.v = target}.
Vector project(const Vector& y, const Quadratic& qd, double lo, double hi) {
  auto clamp_at = [&](double lam) {
    Vector v(y.size());
    for (Index i = 0; i < y.size(); ++i) v[i] = std::clamp(y[i] - lam * qd.m[i], lo, hi);
    return v;
  };
  double a = -1.0, b = 1.0;
  while (qd.m.dot(clamp_at(a)) < qd.target) a *= 2.0;
  while (qd.m.dot(clamp_at(b)) > qd.target) b *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    (qd.m.dot(clamp_at(mid)) > qd.target ? a : b) = mid;
  }
  return clamp_at(0.5 * (a + b));
}

// Minimizer over the affine face where `fixed` dofs sit at `value`.
bool solve_face(const Quadratic& qd, const std::vector<int>& state, double lo, double hi, Vector& v) {
  const Index n = qd.q.size();
  std::vector<Index> free;
  Vector x = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (state[i] < 0) x[i] = lo;
    else if (state[i] > 0) x[i] = hi;
    else free.push_back(i);
  }
  const Index nf = static_cast<Index>(free.size());
  if (nf == 0) {
    v = x;
    return std::abs(qd.m.dot(x) - qd.target) <= 1e-12 * (1.0 + std::abs(qd.target));
  }
  Dense kkt = Dense::Zero(nf + 1, nf + 1);
  Vector rhs(nf + 1);
  const Vector gfix = qd.h * x + qd.q;
  for (Index a = 0; a < nf; ++a) {
    for (Index b = 0; b < nf; ++b) kkt(a, b) = qd.h(free[a], free[b]);
    kkt(a, nf) = kkt(nf, a) = qd.m[free[a]];
    rhs[a] = -gfix[free[a]];
  }
  rhs[nf] = qd.target - qd.m.dot(x);
  const Vector sol = kkt.fullPivLu().solve(rhs);
  for (Index a = 0; a < nf; ++a) x[free[a]] = sol[a];
  v = x;
  return true;
}

}  // namespace

double dense_energy(const ViProblem& prob, const NodalVector& v) { return objective(build(prob), v); }

QpSolution projected_gradient(const ViProblem& prob, int max_iter) {
  const Quadratic qd = build(prob);
  const double lo = prob.bounds.lower, hi = prob.bounds.upper;
  const double lmax = Eigen::SelfAdjointEigenSolver<Dense>(qd.h).eigenvalues().maxCoeff();
  const double step = 1.0 / lmax;
  Vector v = project(Vector::Constant(qd.q.size(), qd.target / qd.m.sum()), qd, lo, hi);
  QpSolution out;
  for (int it = 0; it < max_iter; ++it) {
    const Vector g = qd.h * v + qd.q;
    const Vector d = project(v - step * g, qd, lo, hi) - v;
    const double curv = d.dot(qd.h * d);
    if (d.norm() < 1e-15) break;
    const double s = curv > 0.0 ? std::clamp(-g.dot(d) / curv, 0.0, 1.0) : 1.0;
    v += s * d;
    out.iterations = it + 1;
  }
  // Polish: solve exactly on the identified face and keep it if it is
  // feasible and not worse.
  std::vector<int> state(v.size(), 0);
  const double tol = 1e-9 * (1.0 + hi - lo);
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] <= lo + tol) state[i] = -1;
    else if (v[i] >= hi - tol) state[i] = 1;
  }
  Vector face;
  if (solve_face(qd, state, lo, hi, face)) {
    const bool feasible = face.minCoeff() >= lo - 1e-12 && face.maxCoeff() <= hi + 1e-12;
    if (feasible && objective(qd, face) <= objective(qd, v) + 1e-13 * (1.0 + std::abs(objective(qd, v))))
      v = face.cwiseMax(lo).cwiseMin(hi);
  }
  out.u = v;
  out.objective = objective(qd, v);
  return out;
}

ViProblem random_problem(std::uint64_t seed, int cells) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto space = build_space(Mesh::interval(0.0, 1.0, cells), 1);
  const double m0 = 0.5 + uni(gen), m1 = 0.5 + uni(gen) * 1.5, kappa = 0.01 + 0.05 * uni(gen);
  const double freq = 1.0 + 3.0 * uni(gen), phase = 6.28 * uni(gen), amp = 5.0 + 20.0 * uni(gen);
  ViProblem prob;
  prob.theta = 1.0;
  prob.mass = assemble_mass(*space);
  prob.mobility = assemble_stiffness(*space, Coefficient::scalar([=](const Point& x, double) { return m0 + m1 * x[0]; }));
  prob.primal = kappa * assemble_stiffness(*space, Coefficient::constant(1.0));
  prob.rhs1 = assemble_load(*space, Coefficient::scalar([=](const Point& x, double) {
    return amp * std::sin(freq * 6.28 * x[0] + phase);
  }));
  prob.rhs2 = assemble_load(*space, Coefficient::scalar([=](const Point& x, double) {
    return amp * std::cos(freq * 3.14 * x[0] - phase);
  }));
  const double mean = prob.rhs1.sum() / prob.theta;  // measure is 1
  const double half = 0.2 + 0.5 * uni(gen);
  prob.bounds.lower = mean - half * (0.5 + uni(gen));
  prob.bounds.upper = mean + half * (0.5 + uni(gen));
  return prob;
}

bool Comparison::passed(double tol, double energy_slack) const {
  return error.empty() && pdas_converged && any_active && max_diff <= tol && pdas_energy <= oracle_energy + energy_slack;
}

std::vector<Comparison> compare_suite(int count, std::uint64_t seed) {
  std::vector<Comparison> out;
  std::uint64_t s = seed;
  while (static_cast<int>(out.size()) < count) {
    Comparison c;
    c.seed = s;
    const int cells = 6 + static_cast<int>(s % 6);  // 7..12 dofs
    ++s;
    const ViProblem prob = random_problem(c.seed, cells);
    c.dofs = prob.size();
    try {
      const PdasResult res = pdas_solve(prob, PdasConfig{}, solve_unconstrained(prob).u);
      c.pdas_converged = res.report.converged;
      c.pdas_iterations = res.report.iterations;
      c.any_active = res.report.any_active();
      if (!c.any_active) continue;  // the suite only counts problems with active constraints
      const QpSolution qp = projected_gradient(prob);
      c.max_diff = (res.u - qp.u).cwiseAbs().maxCoeff();
      c.pdas_energy = energy_value(prob, res.u);
      c.oracle_energy = qp.objective;
    } catch (const std::exception& e) {
      c.error = e.what();
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace vifem::oracle
