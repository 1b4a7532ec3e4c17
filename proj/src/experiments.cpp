// SPDX-License-Identifier: Apache-2.0

#include "vifem/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace vifem {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();
}  // namespace

const char* to_string(PdeKind kind) {
  switch (kind) {
    case PdeKind::stationary: return "stationary";
    case PdeKind::fourth_no_potential: return "fourth-no-potential";
    case PdeKind::fourth_sav: return "fourth-sav";
    case PdeKind::second_order: return "second-order";
  }
  return "unknown";
}

TauRule TauRule::parse(const std::string& text) {
  auto number = [&text](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !(v > 0.0) || !std::isfinite(v))
      throw Error("invalid time-step rule '" + text + "': expected h, h/<positive number>, or a positive number");
    return v;
  };
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  TauRule r;
  if (s == "h") {
    r.divisor = 1.0;
  } else if (s.rfind("h/", 0) == 0) {
    r.divisor = number(s.substr(2));
  } else {
    r.literal = number(s);
  }
  return r;
}

double TauRule::tau(double h) const {
  if (divisor > 0.0) return h / divisor;
  if (literal > 0.0) return literal;
  throw Error("TauRule: rule is empty");
}

std::string TauRule::str() const {
  std::ostringstream os;
  os.precision(17);
  if (divisor > 0.0) {
    if (divisor == 1.0) return "h";
    os << "h/" << divisor;
  } else {
    os << literal;
  }
  return os.str();
}

Mesh TestCase::mesh(int cells) const {
  if (dim == 1) return Mesh::interval(lower[0], upper[0], cells);
  return Mesh::rectangle(lower, upper, cells, cells);
}

NodalVector random_initial_field(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  NodalVector v(n);
  for (Index i = 0; i < n; ++i) {
    const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0, 1)
    v[i] = 0.2 + 0.05 * (2.0 * unit - 1.0);
  }
  return v;
}

namespace {

BoundsSchedule schedule_from(const CaseSettings& s, BoundsSchedule fallback) {
  if (s.lower) {
    const double lo = *s.lower;
    fallback.lower = [lo](double) { return lo; };
  }
  if (s.upper) {
    const double hi = *s.upper;
    fallback.upper = [hi](double) { return hi; };
  }
  if (s.relax) fallback.relax = *s.relax;
  return fallback;
}

double param(const CaseSettings& s, const std::string& key) {
  const auto it = s.params.find(key);
  if (it == s.params.end()) throw Error("missing case parameter '" + key + "'");
  return it->second;
}

// Logarithmic potential shifted so that its minimum on (-1, 1) is zero.
double log_potential_raw(double u) {
  u = std::clamp(u, -1.0 + 1e-14, 1.0 - 1e-14);
  return (1.0 + u) * std::log(1.0 + u) + (1.0 - u) * std::log(1.0 - u) - 2.5 * u * u;
}

double log_derivative(double u) {
  u = std::clamp(u, -1.0 + 1e-14, 1.0 - 1e-14);
  return std::log(1.0 + u) - std::log(1.0 - u) - 5.0 * u;
}

double log_potential_min() {
  // f is negative just right of zero and positive near 1: bisect for its root.
  double a = 1e-3, b = 1.0 - 1e-12;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    (log_derivative(m) < 0.0 ? a : b) = m;
  }
  return log_potential_raw(0.5 * (a + b));
}

SavConfig log_potential() {
  static const double shift = log_potential_min();
  SavConfig sav;
  sav.potential = [](double u) { return log_potential_raw(u) - shift; };
  sav.derivative = log_derivative;
  sav.c0 = 1.0;
  return sav;
}

SavConfig quartic_potential() {
  SavConfig sav;
  sav.potential = [](double u) { return 0.25 * (u * u - 1.0) * (u * u - 1.0); };
  sav.derivative = [](double u) { return u * u * u - u; };
  sav.c0 = 1.0;
  return sav;
}

ScalarField at_zero(const std::function<double(const Point&, double)>& f) {
  return [f](const Point& x) { return f(x, 0.0); };
}

std::vector<TestCase> build_registry() {
  std::vector<TestCase> cases;

  {
    TestCase tc;
    tc.name = "stationary_smooth_2d";
    tc.label = 'a';
    tc.kind = PdeKind::stationary;
    tc.summary = "2D stationary problem with mobility 1+x and smooth exact solution cos(4 pi x)cos(4 pi y)";
    tc.dim = 2;
    tc.lower = {0.0, 0.0};
    tc.upper = {1.0, 1.0};
    tc.exact = manufactured::stationary_smooth();
    tc.defaults.p = 1;
    tc.defaults.cells = {8, 16, 32, 64};
    tc.defaults.lower = -1.0;
    tc.defaults.upper = 1.0;
    tc.defaults.relax = 0.0;
    const auto src = tc.exact->source;
    tc.stationary = [src](const Discretization& disc, const CaseSettings& s) {
      const BoxBounds box{*s.lower, *s.upper, *s.relax};
      return solve_stationary(disc, Coefficient::scalar(src), Coefficient::constant(0.0),
                              Coefficient::scalar([](const Point& x, double) { return 1.0 + x[0]; }),
                              Coefficient::constant(1.0), box, s.pdas);
    };
    cases.push_back(std::move(tc));
  }
  {
    TestCase tc;
    tc.name = "stationary_discontinuous_1d";
    tc.label = 'b';
    tc.kind = PdeKind::stationary;
    tc.summary = "1D stationary problem with piecewise mobility (2 near the origin, epsilon elsewhere) and step data";
    tc.dim = 1;
    tc.lower = {-2.0, 0.0};
    tc.upper = {2.0, 0.0};
    tc.reference = true;
    tc.defaults.p = 1;
    tc.defaults.cells = {64, 128, 256, 512};
    tc.defaults.lower = 0.0;
    tc.defaults.upper = 1.0;
    tc.defaults.relax = 0.0;
    tc.defaults.params["epsilon"] = 1e-1;
    tc.stationary = [](const Discretization& disc, const CaseSettings& s) {
      const double eps = param(s, "epsilon");
      if (!(eps > 0.0)) throw Error("stationary_discontinuous_1d: epsilon must be positive");
      const BoxBounds box{*s.lower, *s.upper, *s.relax};
      const auto mob = Coefficient::scalar([eps](const Point& x, double) { return std::abs(x[0]) < 0.5 ? 2.0 : eps; });
      const auto f1 = Coefficient::scalar([](const Point& x, double) { return x[0] > 0.0 && x[0] < 1.0 ? 1.0 : 0.0; });
      const auto f2 = Coefficient::scalar([](const Point& x, double) { return x[0] > -1.0 && x[0] < 0.0 ? 5.0 : 0.0; });
      return solve_stationary(disc, f1, f2, mob, Coefficient::constant(1.0), box, s.pdas);
    };
    cases.push_back(std::move(tc));
  }
  {
    TestCase tc;
    tc.name = "lubrication_accuracy";
    tc.label = 'c';
    tc.kind = PdeKind::fourth_no_potential;
    tc.summary = "thin-film equation with mobility u, exact solution (1+cos x cos y)cos t, bounds [0, 2cos t]";
    tc.dim = 2;
    tc.lower = {0.0, 0.0};
    tc.upper = {2.0 * pi, 2.0 * pi};
    tc.final_time = 1.0;
    tc.exact = manufactured::lubrication();
    tc.defaults.p = 1;
    tc.defaults.k = 2;
    tc.defaults.cells = {8, 16, 32, 64};
    tc.defaults.tau_rule = TauRule::parse("h/2");
    tc.defaults.relax = 0.0;
    const auto ex = *tc.exact;
    tc.setup = [ex](const Discretization& disc, const CaseSettings& s) {
      CaseInstance in;
      BoundsSchedule b;
      b.lower = [](double) { return 0.0; };
      b.upper = [](double t) { return 2.0 * std::cos(t); };
      in.bounds = schedule_from(s, b);
      in.model.kind = SchemeKind::fourth_order;
      in.model.mobility = [](double v, const Point&, double) { return std::max(v, 0.0); };
      in.model.degenerate = true;
      in.model.source = ex.source;
      in.model.bounds = in.bounds;
      in.u0 = init_vi(disc, at_zero(ex.value), ex.bilaplacian0, in.bounds.at(0.0), s.pdas);
      in.forced = true;
      return in;
    };
    cases.push_back(std::move(tc));
  }
  {
    TestCase tc;
    tc.name = "lubrication_singular";
    tc.label = 'd';
    tc.kind = PdeKind::fourth_no_potential;
    tc.summary = "1D thin-film equation with mobility sqrt(u) and a finite-time touchdown near t = 7.4e-4";
    tc.dim = 1;
    tc.lower = {-1.0, 0.0};
    tc.upper = {1.0, 0.0};
    tc.final_time = 0.05;
    tc.defaults.p = 1;
    tc.defaults.k = 1;
    tc.defaults.cells = {49};
    tc.defaults.tau_rule = TauRule::parse("1e-4");
    tc.defaults.relax = 1e-15;
    tc.setup = [](const Discretization& disc, const CaseSettings& s) {
      CaseInstance in;
      BoundsSchedule b;
      b.lower = [](double) { return 0.0; };
      b.upper = [](double) { return inf; };
      in.bounds = schedule_from(s, b);
      in.model.kind = SchemeKind::fourth_order;
      in.model.mobility = [](double v, const Point&, double) { return std::sqrt(std::max(v, 0.0)); };
      in.model.degenerate = true;
      in.model.bounds = in.bounds;
      in.u0 = init_vi(
          disc, [](const Point& x) { return manufactured::thin_film_initial(x[0]); },
          [](const Point& x) { return manufactured::thin_film_initial_bilaplacian(x[0]); }, in.bounds.at(0.0),
          s.pdas);
      return in;
    };
    cases.push_back(std::move(tc));
  }
  {
    TestCase tc;
    tc.name = "ch_accuracy";
    tc.label = 'e';
    tc.kind = PdeKind::fourth_sav;
    tc.summary = "Cahn-Hilliard with mobility 1-u^2, quartic potential, exact solution cos x cos y cos t";
    tc.dim = 2;
    tc.lower = {0.0, 0.0};
    tc.upper = {2.0 * pi, 2.0 * pi};
    tc.final_time = 1.0;
    tc.exact = manufactured::cahn_hilliard();
    tc.defaults.p = 1;
    tc.defaults.k = 2;
    tc.defaults.cells = {8, 16, 32, 64};
    tc.defaults.tau_rule = TauRule::parse("h/2");
    tc.defaults.relax = 0.0;
    const auto ex = *tc.exact;
    tc.setup = [ex](const Discretization& disc, const CaseSettings& s) {
      CaseInstance in;
      BoundsSchedule b;
      b.lower = [](double t) { return -std::cos(t); };
      b.upper = [](double t) { return std::cos(t); };
      in.bounds = schedule_from(s, b);
      in.model.kind = SchemeKind::sav;
      in.model.mobility = [](double v, const Point&, double) { return std::max(1.0 - v * v, 0.0); };
      in.model.degenerate = true;
      in.model.sav = quartic_potential();
      in.model.source = ex.source;
      in.model.bounds = in.bounds;
      in.sav = in.model.sav;
      in.u0 = init_vi(disc, at_zero(ex.value), ex.bilaplacian0, in.bounds.at(0.0), s.pdas);
      in.forced = true;
      return in;
    };
    cases.push_back(std::move(tc));
  }
  {
    TestCase tc;
    tc.name = "ch_logarithmic";
    tc.label = 'f';
    tc.kind = PdeKind::fourth_sav;
    tc.summary = "Cahn-Hilliard with mobility 1-u^2, kappa 0.01 and logarithmic potential from random data";
    tc.dim = 2;
    tc.lower = {0.0, 0.0};
    tc.upper = {1.0, 1.0};
    tc.final_time = 0.15;
    tc.defaults.p = 1;
    tc.defaults.k = 2;
    tc.defaults.cells = {49};
    tc.defaults.tau_rule = TauRule::parse("1e-4");
    tc.defaults.relax = 1e-10;
    tc.setup = [](const Discretization& disc, const CaseSettings& s) {
      CaseInstance in;
      in.bounds = schedule_from(s, BoundsSchedule::fixed(-1.0, 1.0, 0.0));
      in.model.kind = SchemeKind::sav;
      in.model.mobility = [](double v, const Point&, double) { return std::max(1.0 - v * v, 0.0); };
      in.model.degenerate = true;
      in.model.kappa = 0.01;
      in.model.sav = log_potential();
      in.model.bounds = in.bounds;
      in.kappa = 0.01;
      in.sav = in.model.sav;
      in.u0 = random_initial_field(disc.space().num_dofs(), s.seed);
      return in;
    };
    cases.push_back(std::move(tc));
  }
  {
    TestCase tc;
    tc.name = "second_order_accuracy";
    tc.label = 'g';
    tc.kind = PdeKind::second_order;
    tc.summary = "regularized nonlinear diffusion with K = 1+u and exact solution (cos x cos y - 3x^4/(8 pi) + x^3)cos t";
    tc.dim = 2;
    tc.lower = {0.0, 0.0};
    tc.upper = {2.0 * pi, 2.0 * pi};
    tc.final_time = 1.0;
    tc.exact = manufactured::second_order();
    tc.defaults.p = 1;
    tc.defaults.k = 2;
    tc.defaults.cells = {8, 16, 32, 64};
    tc.defaults.tau_rule = TauRule::parse("h/2");
    tc.defaults.relax = 0.0;
    const auto ex = *tc.exact;
    tc.setup = [ex](const Discretization& disc, const CaseSettings& s) {
      CaseInstance in;
      BoundsSchedule b;
      b.lower = [](double t) { return -std::cos(t); };
      b.upper = [](double t) { return (1.0 + 2.0 * pi * pi * pi) * std::cos(t); };
      in.bounds = schedule_from(s, b);
      in.model.kind = SchemeKind::second_order;
      in.model.mobility = [](double v, const Point&, double) { return std::max(1.0 + v, 0.0); };
      in.model.degenerate = true;
      in.model.source = ex.source;
      in.model.bounds = in.bounds;
      const BoxBounds box0 = in.bounds.at(0.0);
      in.u0 = interpolate(disc.space(), at_zero(ex.value));
      for (Index i = 0; i < in.u0.size(); ++i) in.u0[i] = box0.clamp(in.u0[i]);
      in.forced = true;
      return in;
    };
    cases.push_back(std::move(tc));
  }
  {
    TestCase tc;
    tc.name = "dirichlet_positivity";
    tc.label = 'h';
    tc.kind = PdeKind::stationary;
    tc.summary = "anisotropic diffusion with homogeneous Dirichlet data and nonnegative source";
    tc.dim = 2;
    tc.lower = {0.0, 0.0};
    tc.upper = {1.0, 1.0};
    tc.defaults.p = 1;
    tc.defaults.cells = {14};
    tc.defaults.lower = 0.0;
    tc.defaults.upper = inf;
    tc.defaults.relax = 0.0;
    tc.stationary = [](const Discretization& disc, const CaseSettings& s) {
      const BoxBounds box{*s.lower, *s.upper, *s.relax};
      const auto k = Coefficient::matrix([](const Point& p, double) {
        const double x = p[0], y = p[1], d = 1e-4;
        Matrix2 m;
        m << x * x + d * y * y, -(1.0 - d) * x * y, -(1.0 - d) * x * y, y * y + d * x * x;
        return m;
      });
      const auto f1 = Coefficient::scalar([](const Point& p, double) { return std::abs(p[0] - 0.5) <= 0.125 ? 1.0 : 0.0; });
      return solve_regularized_elliptic(disc, k, f1, box, s.pdas);
    };
    cases.push_back(std::move(tc));
  }
  {
    TestCase tc;
    tc.name = "porous_medium_barenblatt";
    tc.label = 'i';
    tc.kind = PdeKind::second_order;
    tc.summary = "porous medium equation u_t = (u^m)_xx with the Barenblatt solution on (-5, 5)";
    tc.dim = 1;
    tc.lower = {-5.0, 0.0};
    tc.upper = {5.0, 0.0};
    tc.final_time = 1.2;
    tc.defaults.p = 1;
    tc.defaults.k = 2;
    tc.defaults.cells = {64, 128, 256, 512};
    tc.defaults.tau_rule = TauRule::parse("h/10");
    tc.defaults.relax = 0.0;
    tc.defaults.params["m"] = 2.0;
    tc.exact = manufactured::barenblatt(2.0);
    tc.setup = [](const Discretization& disc, const CaseSettings& s) {
      const double m = param(s, "m");
      if (!(m > 1.0)) throw Error("porous_medium_barenblatt: exponent m must exceed 1");
      CaseInstance in;
      in.bounds = schedule_from(s, BoundsSchedule::fixed(0.0, 1.0, 0.0));
      in.model.kind = SchemeKind::second_order;
      in.model.mobility = [m](double v, const Point&, double) { return m * std::pow(std::max(v, 0.0), m - 1.0); };
      in.model.degenerate = true;
      in.model.bounds = in.bounds;
      in.u0 = interpolate(disc.space(), at_zero(manufactured::barenblatt(m).value));
      return in;
    };
    cases.push_back(std::move(tc));
  }
  return cases;
}

// Exact solution with case parameters applied.
std::optional<manufactured::ExactSolution> exact_for(const TestCase& tc, const CaseSettings& s) {
  if (tc.name == "porous_medium_barenblatt") return manufactured::barenblatt(param(s, "m"));
  return tc.exact;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct LevelOutput {
  LevelResult level;
  std::vector<StepRecord> trace;
  NodalVector u;
  std::shared_ptr<const FeSpace> space;
};

StepRecord record(const Discretization& disc, const NodalVector& u, double t, double kappa,
                  const std::optional<SavConfig>& sav, std::optional<double> r, int iters, bool active) {
  const Diagnostics d = diagnostics(disc, u, t, kappa, sav ? &*sav : nullptr, r);
  StepRecord rec;
  rec.t = t;
  rec.mass = d.mass;
  rec.min_u = d.min;
  rec.max_u = d.max;
  rec.energy = d.dirichlet_energy + (d.e1 ? *d.e1 : 0.0);
  rec.modified_energy = d.modified_energy;
  rec.pdas_iters = iters;
  rec.active = active;
  return rec;
}

LevelOutput run_stationary_level(const TestCase& tc, const CaseSettings& s, int cells,
                                 const std::function<ErrorNorms(const FeSpace&, const NodalVector&)>& errors) {
  LevelOutput out;
  const auto start = std::chrono::steady_clock::now();
  LevelResult& lv = out.level;
  lv.cells = cells;
  const Mesh mesh = tc.mesh(cells);
  out.space = build_space(mesh, s.p);
  const Discretization disc(out.space);
  lv.h = mesh.diameter();
  lv.dofs = out.space->num_dofs();
  const StationaryResult res = tc.stationary(disc, s);
  out.u = res.solution.u;
  lv.pdas_max_iter = res.solution.report.iterations;
  const BoxBounds box{*s.lower, *s.upper, *s.relax};
  lv.bound_violation = std::max({0.0, box.lo() - out.u.minCoeff(), out.u.maxCoeff() - box.hi()});
  if (std::isfinite(res.target_mass)) {
    lv.initial_mass = res.target_mass;
    lv.mass_drift = std::abs(disc.integral(out.u) - res.target_mass);
  }
  if (errors) {
    const ErrorNorms e = errors(*out.space, out.u);
    lv.l2_rel = e.l2;
    lv.h1_rel = e.h1;
  }
  out.trace.push_back(record(disc, out.u, 0.0, 1.0, std::nullopt, std::nullopt, lv.pdas_max_iter,
                             res.solution.report.any_active()));
  lv.wall_seconds = elapsed(start);
  return out;
}

LevelOutput run_parabolic_level(const TestCase& tc, const CaseSettings& s, int cells, bool keep_trace) {
  LevelOutput out;
  const auto start = std::chrono::steady_clock::now();
  LevelResult& lv = out.level;
  lv.cells = cells;
  const Mesh mesh = tc.mesh(cells);
  out.space = build_space(mesh, s.p);
  const Discretization disc(out.space);
  lv.h = mesh.diameter();
  lv.dofs = out.space->num_dofs();

  const CaseInstance in = tc.setup(disc, s);
  const double final_time = s.final_time.value_or(tc.final_time);
  if (!s.tau_rule) throw Error(tc.name + ": no time-step rule");
  const double tau_raw = s.tau_rule->tau(lv.h);
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(final_time / tau_raw - 1e-9)));
  lv.tau = final_time / static_cast<double>(steps);
  lv.steps = steps;

  TimeState state = start_state(disc, in.model, in.u0, 0.0, lv.tau);
  const double m0 = disc.integral(in.u0);
  lv.initial_mass = m0;
  {
    const BoxBounds b0 = in.bounds.at(0.0);
    lv.bound_violation = std::max({0.0, b0.lo() - in.u0.minCoeff(), in.u0.maxCoeff() - b0.hi()});
  }
  std::optional<double> r0;
  if (!state.r_history.empty()) r0 = state.r_history.front();
  if (keep_trace) out.trace.push_back(record(disc, in.u0, 0.0, in.kappa, in.sav, r0, 0, false));

  double defect_sum = 0.0;
  AdvanceOptions opt;
  opt.k = s.k;
  opt.steps = steps;
  opt.warmup_substeps = s.warmup_substeps;
  opt.pdas = s.pdas;
  advance(disc, in.model, state, opt, [&](const TimeState& st, const StepInfo& info) {
    const NodalVector& u = st.current();
    lv.pdas_max_iter = std::max(lv.pdas_max_iter, info.report.iterations);
    lv.bound_violation =
        std::max({lv.bound_violation, info.bounds.lo() - u.minCoeff(), u.maxCoeff() - info.bounds.hi()});
    if (in.forced) {
      defect_sum += info.mass_defect;
      lv.mass_drift = std::max(lv.mass_drift, defect_sum);
    } else {
      lv.mass_drift = std::max(lv.mass_drift, std::abs(disc.integral(u) - m0));
    }
    if (keep_trace) {
      std::optional<double> r;
      if (!st.r_history.empty()) r = st.r_history.front();
      out.trace.push_back(record(disc, u, st.t, in.kappa, in.sav, r, info.report.iterations, info.report.any_active()));
    }
  });
  out.u = state.current();
  if (const auto ex = exact_for(tc, s)) {
    const auto value = ex->value;
    const auto grad = ex->gradient;
    const double t = state.t;
    const ErrorNorms e = error_norms(*out.space, out.u, [&](const Point& x) { return value(x, t); },
                                     [&](const Point& x) { return grad(x, t); });
    lv.l2_rel = e.l2;
    lv.h1_rel = e.h1;
  }
  lv.wall_seconds = elapsed(start);
  return out;
}

void summarize(RunResult& run) {
  std::vector<std::pair<double, double>> l2, h1;
  bool complete = true;
  for (const LevelResult& lv : run.levels) {
    if (!lv.ok) {
      complete = false;
      continue;
    }
    run.pdas_max_iter = std::max(run.pdas_max_iter, lv.pdas_max_iter);
    run.max_mass_drift = std::max(run.max_mass_drift, lv.mass_drift / (1.0 + std::abs(lv.initial_mass)));
    run.max_bound_violation = std::max(run.max_bound_violation, lv.bound_violation);
    if (lv.l2_rel > 0.0) l2.emplace_back(lv.h, lv.l2_rel);
    if (lv.h1_rel > 0.0) h1.emplace_back(lv.h, lv.h1_rel);
  }
  if (complete && l2.size() == run.levels.size() && l2.size() >= 2) run.eoc_l2 = eoc(l2);
  if (complete && h1.size() == run.levels.size() && h1.size() >= 2) run.eoc_h1 = eoc(h1);
}

}  // namespace

const std::vector<TestCase>& registry() {
  static const std::vector<TestCase> cases = build_registry();
  return cases;
}

const TestCase& find_case(const std::string& name) {
  for (const TestCase& tc : registry())
    if (tc.name == name || (name.size() == 1 && name[0] == tc.label)) return tc;
  std::string known;
  for (const TestCase& tc : registry()) known += (known.empty() ? "" : ", ") + tc.name;
  throw Error("unknown case '" + name + "' (known: " + known + ")");
}

CaseSettings resolve_settings(const TestCase& tc, const CaseSettings& user) {
  CaseSettings s = user;
  const CaseSettings& d = tc.defaults;
  if (s.cells.empty()) s.cells = d.cells;
  if (!s.tau_rule) s.tau_rule = d.tau_rule;
  if (!s.lower) s.lower = d.lower;
  if (!s.upper) s.upper = d.upper;
  if (!s.relax) s.relax = d.relax;
  for (const auto& [key, value] : d.params) s.params.try_emplace(key, value);
  if (s.p < 1 || s.p > 4) throw Error("p must be in 1..4");
  if (s.k < 1 || s.k > 5) throw Error("k must be in 1..5");
  if (s.cells.empty()) throw Error("no mesh sizes given");
  for (int c : s.cells)
    if (c < 1) throw Error("mesh sizes must be positive");
  return s;
}

RunResult run_convergence(const TestCase& tc, const CaseSettings& user, int jobs) {
  const auto start = std::chrono::steady_clock::now();
  const CaseSettings s = resolve_settings(tc, user);
  RunResult run;
  run.case_name = tc.name;
  run.seed = s.seed;
  std::vector<int> cells = s.cells;
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

  std::function<ErrorNorms(const FeSpace&, const NodalVector&)> errors;
  if (tc.kind == PdeKind::stationary) {
    if (const auto ex = exact_for(tc, s)) {
      const auto value = ex->value;
      const auto grad = ex->gradient;
      errors = [value, grad](const FeSpace& space, const NodalVector& u) {
        return error_norms(space, u, [&](const Point& x) { return value(x, 0.0); },
                           [&](const Point& x) { return grad(x, 0.0); });
      };
    } else if (tc.reference) {
      CaseSettings rs = s;
      rs.p = 3;
      rs.pdas.max_iter = std::max(rs.pdas.max_iter, 5000);
      const LevelOutput ref = run_stationary_level(tc, rs, 4 * cells.back(), {});
      const auto ref_space = ref.space;
      const NodalVector ref_u = ref.u;
      errors = [ref_space, ref_u](const FeSpace& space, const NodalVector& u) {
        return reference_error(space, u, *ref_space, ref_u);
      };
    }
  }

  auto run_one = [&](int c) -> LevelOutput {
    try {
      if (tc.kind == PdeKind::stationary) return run_stationary_level(tc, s, c, errors);
      return run_parabolic_level(tc, s, c, false);
    } catch (const PdasFailure& e) {
      LevelOutput out;
      out.level.cells = c;
      out.level.h = tc.mesh(c).diameter();
      out.level.ok = false;
      out.level.error = e.what();
      out.level.failure = e.report();
      return out;
    } catch (const std::exception& e) {
      LevelOutput out;
      out.level.cells = c;
      out.level.h = tc.mesh(c).diameter();
      out.level.ok = false;
      out.level.error = e.what();
      return out;
    }
  };

  std::vector<LevelOutput> outs(cells.size());
  if (jobs > 1) {
    std::vector<std::future<LevelOutput>> futs;
    std::size_t next = 0;
    while (next < cells.size()) {
      futs.clear();
      const std::size_t first = next;
      for (; next < cells.size() && next - first < static_cast<std::size_t>(jobs); ++next)
        futs.push_back(std::async(std::launch::async, run_one, cells[next]));
      for (std::size_t j = 0; j < futs.size(); ++j) outs[first + j] = futs[j].get();
    }
  } else {
    for (std::size_t j = 0; j < cells.size(); ++j) outs[j] = run_one(cells[j]);
  }
  for (auto& o : outs) run.levels.push_back(o.level);
  if (!outs.empty()) {
    run.final_u = outs.back().u;
    run.final_space = outs.back().space;
  }
  summarize(run);
  run.wall_seconds = elapsed(start);
  return run;
}

RunResult run_simulation(const TestCase& tc, const CaseSettings& user) {
  const auto start = std::chrono::steady_clock::now();
  const CaseSettings s = resolve_settings(tc, user);
  RunResult run;
  run.case_name = tc.name;
  run.seed = s.seed;
  const int cells = s.cells.back();
  LevelOutput out;
  if (tc.kind == PdeKind::stationary) {
    std::function<ErrorNorms(const FeSpace&, const NodalVector&)> errors;
    if (const auto ex = exact_for(tc, s)) {
      const auto value = ex->value;
      const auto grad = ex->gradient;
      errors = [value, grad](const FeSpace& space, const NodalVector& u) {
        return error_norms(space, u, [&](const Point& x) { return value(x, 0.0); },
                           [&](const Point& x) { return grad(x, 0.0); });
      };
    }
    out = run_stationary_level(tc, s, cells, errors);
  } else {
    out = run_parabolic_level(tc, s, cells, true);
  }
  run.levels.push_back(out.level);
  run.trace = std::move(out.trace);
  run.final_u = std::move(out.u);
  run.final_space = out.space;
  summarize(run);
  run.wall_seconds = elapsed(start);
  return run;
}

}  // namespace vifem
