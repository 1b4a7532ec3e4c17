// SPDX-License-Identifier: Apache-2.0

#include "vifem/vi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vifem {

void BoxBounds::validate() const {
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper))
    throw Error("BoxBounds: need lower < upper");
  if (!(relax >= 0.0) || !std::isfinite(relax)) throw Error("BoxBounds: relaxation must be finite and >= 0");
}

void ViProblem::validate() const {
  const Index n = mass.rows();
  auto square = [n](const SparseMatrix& m, const char* name) {
    if (m.rows() != n || m.cols() != n)
      throw Error(std::string("ViProblem: ") + name + " has the wrong shape");
  };
  square(mass, "mass matrix");
  square(mobility, "mobility matrix");
  square(primal, "primal stiffness");
  if (extra_primal) square(*extra_primal, "extra primal stiffness");
  if (rhs1.size() != n || rhs2.size() != n) throw Error("ViProblem: right-hand sides have the wrong length");
  if (!rhs1.allFinite() || !rhs2.allFinite()) throw Error("ViProblem: right-hand sides are not finite");
  if (!std::isfinite(theta) || theta < 0.0 || (theta == 0.0 && dirichlet.empty()))
    throw Error("ViProblem: theta must be positive (zero only with Dirichlet dofs)");
  bounds.validate();
  for (Index i : dirichlet)
    if (i < 0 || i >= n) throw Error("ViProblem: Dirichlet dof out of range");
  if (sav) {
    if (sav->d.size() != n || sav->u_hist.size() != n) throw Error("SavCoupling: vectors have the wrong length");
    if (!sav->d.allFinite() || !sav->u_hist.allFinite() || !std::isfinite(sav->r_hist) ||
        !(sav->alpha > 0.0))
      throw Error("SavCoupling: entries must be finite and alpha positive");
  }
}

namespace {

enum class Status : char { free_, lower, upper, fixed };

SparseMatrix selection(Index n, const std::vector<Index>& idx) {
  SparseMatrix e(n, static_cast<Index>(idx.size()));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) trip.emplace_back(idx[j], static_cast<Index>(j), 1.0);
  e.setFromTriplets(trip.begin(), trip.end());
  return e;
}

Vector gather(const Vector& v, const std::vector<Index>& idx) {
  Vector out(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) out[j] = v[idx[j]];
  return out;
}

double ratio(double num, double scale) { return scale > 0.0 ? num / scale : num; }

double row_sum_norm(const SparseMatrix& a) {
  Vector rows = Vector::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

std::string describe(int iteration, const std::vector<Status>& st) {
  std::ostringstream os;
  Index nl = 0, nu = 0;
  std::vector<Index> first;
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (st[i] == Status::lower) ++nl;
    if (st[i] == Status::upper) ++nu;
    if ((st[i] == Status::lower || st[i] == Status::upper) && first.size() < 8) first.push_back(i);
  }
  os << "PDAS iteration " << iteration << ", " << nl << " lower-active and " << nu << " upper-active dofs";
  if (!first.empty()) {
    os << " [";
    for (std::size_t j = 0; j < first.size(); ++j) os << (j ? "," : "") << first[j];
    os << (nl + nu > static_cast<Index>(first.size()) ? ",...]" : "]");
  }
  return os.str();
}

class Solver {
 public:
  Solver(const ViProblem& prob, const PdasConfig& cfg) : p_(prob), cfg_(cfg), n_(prob.size()) {
    p_.validate();
    if (!(cfg.c > 0.0) || cfg.max_iter < 1) throw Error("PdasConfig: need c > 0 and max_iter >= 1");
    base_.assign(n_, Status::free_);
    for (Index i : prob.dirichlet) base_[i] = Status::fixed;
    for (Index i = 0; i < n_; ++i)
      if (base_[i] == Status::free_) free_.push_back(i);
    primal_full_ = prob.theta * prob.mass;
    if (prob.extra_primal) primal_full_ += *prob.extra_primal;
    ones_mass_ = prob.mass * Vector::Ones(n_);
  }

  // A dof active at one bound whose indicator points past the other bound
  // is released rather than moved across the box.
  std::vector<Status> classify(const Vector& u, const Vector& mu, double c,
                               const std::vector<Status>* previous = nullptr) const {
    std::vector<Status> st = base_;
    const double lo = p_.bounds.lo(), hi = p_.bounds.hi();
    for (Index i : free_) {
      const double s = u[i] + mu[i] / c;
      if (s > hi) st[i] = Status::upper;
      else if (s < lo) st[i] = Status::lower;
      if (previous && ((st[i] == Status::upper && (*previous)[i] == Status::lower) ||
                       (st[i] == Status::lower && (*previous)[i] == Status::upper)))
        st[i] = Status::free_;
    }
    return st;
  }

  // With every free dof active the constant part of w is not determined by
  // the linear system. It shifts the nodal multiplier by a constant; pick
  // the shift whose predicted clamped state carries the admissible mass.
  std::vector<Status> classify_gauged(const Vector& u, const Vector& mu, double c) const {
    const double lo = p_.bounds.lower, hi = p_.bounds.upper;
    const double target = p_.rhs1.sum() / p_.theta;
    auto predicted_mass = [&](double shift) {
      double total = 0.0;
      for (Index i = 0; i < n_; ++i) {
        const double s = base_[i] == Status::fixed ? u[i] : u[i] + (mu[i] + shift * ones_mass_[i]) / c;
        total += ones_mass_[i] * std::clamp(s, lo, hi);
      }
      return total;
    };
    double a = -1.0, b = 1.0;
    for (int k = 0; k < 200 && predicted_mass(a) > target; ++k) a *= 2.0;
    for (int k = 0; k < 200 && predicted_mass(b) < target; ++k) b *= 2.0;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (a + b);
      (predicted_mass(mid) < target ? a : b) = mid;
    }
    const double shift = 0.5 * (a + b);
    return classify(u, mu + shift * ones_mass_, c);
  }

  // One reduced linear solve for the given classification.
  void solve(const std::vector<Status>& st, int iteration, PdasResult& out, PdasIteration& rec) const {
    std::vector<Index> inactive;
    Vector u_known = Vector::Zero(n_);
    for (Index i : free_) {
      if (st[i] == Status::free_) inactive.push_back(i);
      else u_known[i] = st[i] == Status::upper ? p_.bounds.upper : p_.bounds.lower;
    }
    const SparseMatrix ef = selection(n_, free_);
    const SparseMatrix ei = selection(n_, inactive);
    const SparseMatrix eft = ef.transpose();
    const SparseMatrix eit = ei.transpose();

    BlockSystem sys;
    sys.a = eft * p_.mobility * ef;
    sys.b = eft * primal_full_ * ei;
    sys.bt = eit * p_.mass * ef;
    sys.c = eit * p_.primal * ei;
    const Index n1 = sys.a.rows(), n2 = sys.c.rows();

    Vector rhs1 = p_.rhs1 - primal_full_ * u_known;
    Vector rhs2 = p_.rhs2 + p_.primal * u_known;

    const bool mean_row = inactive.empty() && p_.dirichlet.empty() && cfg_.fix_w_mean;
    std::vector<double> border_rhs;
    if (p_.sav) {
      const SavCoupling& s = *p_.sav;
      Border bd;
      bd.column = Vector::Zero(n1 + n2 + 1 + (mean_row ? 1 : 0));
      bd.row = bd.column;
      for (Index j = 0; j < n2; ++j) {
        bd.column[n1 + j] = -2.0 * s.d[inactive[j]];
        bd.row[n1 + j] = -s.alpha * s.d[inactive[j]];
      }
      bd.corner = s.alpha;
      border_rhs.push_back(s.r_hist - s.d.dot(s.u_hist) + s.alpha * s.d.dot(u_known));
      sys.borders.push_back(std::move(bd));
    }
    if (mean_row) {
      Border bd;
      bd.column = Vector::Zero(n1 + n2 + 1 + (p_.sav ? 1 : 0));
      bd.column.head(n1) = gather(ones_mass_, free_);
      bd.row = bd.column;
      border_rhs.push_back(0.0);
      sys.borders.push_back(std::move(bd));
    }

    Vector rhs(sys.size());
    rhs.head(n1) = gather(rhs1, free_);
    rhs.segment(n1, n2) = gather(rhs2, inactive);
    for (std::size_t j = 0; j < border_rhs.size(); ++j) rhs[n1 + n2 + static_cast<Index>(j)] = border_rhs[j];

    const Vector x = vifem::solve(sys, rhs, describe(iteration, st));

    out.u = u_known;
    out.w = Vector::Zero(n_);
    for (Index j = 0; j < n1; ++j) out.w[free_[j]] = x[j];
    for (Index j = 0; j < n2; ++j) out.u[inactive[j]] = x[n1 + j];
    out.r = p_.sav ? x[n1 + n2] : 0.0;

    out.mu = p_.mass * out.w - p_.primal * out.u - p_.rhs2;
    if (p_.sav) out.mu -= 2.0 * out.r * p_.sav->d;
    for (Index i = 0; i < n_; ++i)
      if (st[i] == Status::free_ || st[i] == Status::fixed) out.mu[i] = 0.0;

    rec.system_size = sys.size();
    rec.mean_row = mean_row;
    for (Index i : free_) {
      if (st[i] == Status::lower) rec.active_lower.push_back(i);
      if (st[i] == Status::upper) rec.active_upper.push_back(i);
    }
  }

  PdasResult run(const NodalVector& u_init) const {
    if (u_init.size() != n_ || !u_init.allFinite()) throw Error("pdas_solve: initial guess has the wrong length or is not finite");
    PdasResult res;
    double c = cfg_.c;
    std::vector<Status> st = classify(u_init, Vector::Zero(n_), c);
    std::vector<std::vector<Status>> visited;
    bool restricted = false;
    for (int it = 1; it <= cfg_.max_iter; ++it) {
      PdasIteration rec;
      solve(st, it, res, rec);
      rec.kkt_residual = kkt_residual(p_, res.u, res.w, res.mu, res.r);
      res.report.iterations = it;
      res.report.kkt_residual = rec.kkt_residual;
      res.report.w_mean_fixed = rec.mean_row;
      res.report.active_lower = rec.active_lower;
      res.report.active_upper = rec.active_upper;
      res.report.history.push_back(std::move(rec));
      auto propose = [&](double cc) {
        return all_active(st) ? classify_gauged(res.u, res.mu, cc) : classify(res.u, res.mu, cc, &st);
      };
      std::vector<Status> next = propose(c);
      visited.push_back(st);
      // A revisited set means the iteration cycles: continue with a larger c.
      // Once c is at its cap, only the lowest-index dof whose status differs
      // is changed per iteration.
      while (!restricted && next != st && std::find(visited.begin(), visited.end(), next) != visited.end()) {
        if (c < cfg_.c * 1e6) {
          c *= 10.0;
          visited.clear();
          visited.push_back(st);
          next = propose(c);
        } else {
          restricted = true;
        }
      }
      if (restricted && next != st) {
        Index first = 0;
        while (next[first] == st[first]) ++first;
        std::vector<Status> single = st;
        single[first] = next[first];
        next = std::move(single);
      }
      if (next == st) {
        res.report.converged = res.report.kkt_residual <= cfg_.kkt_tol;
        if (!res.report.converged) {
          std::ostringstream os;
          os << "active set is stationary but the KKT residual " << res.report.kkt_residual << " exceeds "
             << cfg_.kkt_tol;
          res.report.message = os.str();
        }
        return res;
      }
      st = std::move(next);
    }
    res.report.converged = false;
    res.report.message = "active set still changing after " + std::to_string(cfg_.max_iter) + " iterations";
    return res;
  }

  bool all_active(const std::vector<Status>& st) const {
    if (!p_.dirichlet.empty() || free_.empty()) return false;
    for (Index i : free_)
      if (st[i] == Status::free_) return false;
    return true;
  }

  PdasResult unconstrained() const {
    PdasResult res;
    PdasIteration rec;
    solve(base_, 1, res, rec);
    res.report.iterations = 1;
    res.report.w_mean_fixed = rec.mean_row;
    res.report.history.push_back(std::move(rec));
    ViProblem loose = p_;
    loose.bounds = BoxBounds{};
    res.report.kkt_residual = kkt_residual(loose, res.u, res.w, res.mu, res.r);
    res.report.converged = res.report.kkt_residual <= cfg_.kkt_tol;
    return res;
  }

 private:
  const ViProblem& p_;
  PdasConfig cfg_;
  Index n_;
  std::vector<Status> base_;
  std::vector<Index> free_;
  SparseMatrix primal_full_;
  Vector ones_mass_;
};

}  // namespace

PdasResult pdas_solve(const ViProblem& prob, const PdasConfig& cfg, const NodalVector& u_init) {
  return Solver(prob, cfg).run(u_init);
}

PdasResult solve_unconstrained(const ViProblem& prob, const PdasConfig& cfg) {
  return Solver(prob, cfg).unconstrained();
}

double kkt_residual(const ViProblem& prob, const NodalVector& u, const NodalVector& w, const NodalVector& mu,
                    double r) {
  const Index n = prob.size();
  if (u.size() != n || w.size() != n || mu.size() != n) throw Error("kkt_residual: vectors have the wrong length");
  std::vector<char> fixed(n, 0);
  for (Index i : prob.dirichlet) fixed[i] = 1;

  const Vector mass_u = prob.theta * (prob.mass * u);
  const Vector mob_w = prob.mobility * w;
  Vector extra = Vector::Zero(n);
  if (prob.extra_primal) extra = *prob.extra_primal * u;
  const Vector mass_w = prob.mass * w;
  const Vector prim_u = prob.primal * u;
  Vector sav_term = Vector::Zero(n);
  if (prob.sav) sav_term = 2.0 * r * prob.sav->d;

  // Equation residuals are measured against normwise magnitudes |A|*|x| so
  // that operators acting on their kernel (stiffness on constants) do not
  // shrink the scale to round-off.
  const double u_norm = u.cwiseAbs().maxCoeff(), w_norm = w.cwiseAbs().maxCoeff();
  double s1 = std::max({prob.theta * row_sum_norm(prob.mass) * u_norm, row_sum_norm(prob.mobility) * w_norm,
                        prob.rhs1.cwiseAbs().maxCoeff()});
  if (prob.extra_primal) s1 = std::max(s1, row_sum_norm(*prob.extra_primal) * u_norm);
  double s2 = std::max({row_sum_norm(prob.mass) * w_norm, row_sum_norm(prob.primal) * u_norm,
                        prob.rhs2.cwiseAbs().maxCoeff(), sav_term.cwiseAbs().maxCoeff()});
  double eq1 = 0.0, eq2 = 0.0, comp = 0.0, bound = 0.0;
  const double lo = prob.bounds.lo(), hi = prob.bounds.hi();
  const double range = std::isfinite(hi - lo) ? hi - lo : 0.0;
  const double at_tol_up = 1e-12 * (1.0 + std::abs(prob.bounds.upper));
  const double at_tol_lo = 1e-12 * (1.0 + std::abs(prob.bounds.lower));
  for (Index i = 0; i < n; ++i) {
    if (fixed[i]) continue;
    eq1 = std::max(eq1, std::abs(mass_u[i] + extra[i] + mob_w[i] - prob.rhs1[i]));
    eq2 = std::max(eq2, std::abs(mass_w[i] - prim_u[i] - prob.rhs2[i] - sav_term[i] - mu[i]));
    s2 = std::max(s2, std::abs(mu[i]));
    const bool at_upper = u[i] >= prob.bounds.upper - at_tol_up;
    const bool at_lower = u[i] <= prob.bounds.lower + at_tol_lo;
    if (mu[i] > 0.0 && !at_upper) comp = std::max(comp, mu[i]);
    if (mu[i] < 0.0 && !at_lower) comp = std::max(comp, -mu[i]);
    bound = std::max({bound, lo - u[i], u[i] - hi});
  }
  double res = std::max({ratio(eq1, s1), ratio(eq2, s2), comp, bound / (1.0 + range)});
  if (prob.sav) {
    const SavCoupling& s = *prob.sav;
    const double a = s.alpha * r, b = s.alpha * s.d.dot(u), c = s.r_hist, d = s.d.dot(s.u_hist);
    res = std::max(res, ratio(std::abs(a - b - c + d), std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d)));
  }
  return res;
}

double energy_value(const ViProblem& prob, const NodalVector& v) {
  prob.validate();
  if (prob.sav || prob.extra_primal || !prob.dirichlet.empty())
    throw Error("energy_value: only defined for uncoupled problems without Dirichlet dofs");
  if (v.size() != prob.size()) throw Error("energy_value: vector has the wrong length");
  const Vector m = prob.mass * Vector::Ones(prob.size());
  const double target = prob.rhs1.sum() / prob.theta;
  const double measure = m.sum();
  const double mass = m.dot(v);
  if (std::abs(mass - target) > 1e-9 * (measure + std::abs(target))) {
    std::ostringstream msg;
    msg << "energy_value: mass " << mass << " differs from the admissible value " << target;
    throw Error(msg.str());
  }
  Vector load = prob.theta * (prob.mass * v) - prob.rhs1;
  load -= (load.sum() / measure) * m;
  const WeightedPoisson poisson(prob.mobility, m);
  return 0.5 * v.dot(prob.primal * v) + prob.rhs2.dot(v) + 0.5 / prob.theta * poisson.norm_sq(load);
}

}  // namespace vifem
