// SPDX-License-Identifier: Apache-2.0

#include "vifem/mesh_fe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vifem {

Mesh Mesh::interval(double lo, double hi, int n) {
  if (n < 1 || !(hi > lo)) throw Error("Mesh::interval: need n >= 1 and hi > lo");
  Mesh m;
  m.dim = 1;
  m.lower = {lo, 0.0};
  m.upper = {hi, 0.0};
  m.cells = {n, 1};
  return m;
}

Mesh Mesh::rectangle(Point lo, Point hi, int nx, int ny) {
  if (nx < 1 || ny < 1 || !(hi[0] > lo[0]) || !(hi[1] > lo[1]))
    throw Error("Mesh::rectangle: need positive cell counts and a non-empty box");
  Mesh m;
  m.dim = 2;
  m.lower = lo;
  m.upper = hi;
  m.cells = {nx, ny};
  return m;
}

double Mesh::diameter() const {
  if (dim == 1) return cell_size(0);
  return std::hypot(cell_size(0), cell_size(1));
}

double Mesh::measure() const {
  double v = upper[0] - lower[0];
  if (dim == 2) v *= upper[1] - lower[1];
  return v;
}

bool Mesh::contains(const Point& x, double slack) const {
  for (int d = 0; d < dim; ++d) {
    const double tol = slack * (upper[d] - lower[d]);
    if (x[d] < lower[d] - tol || x[d] > upper[d] + tol) return false;
  }
  return true;
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw Error("gauss_legendre: need at least one point");
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1], ascending order.
    rule.points[n - 1 - i] = {0.5 * (x + 1.0), 0.0};
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

QuadratureRule tensor_gauss(int dim, int n_per_axis) {
  const QuadratureRule line = gauss_legendre(n_per_axis);
  if (dim == 1) return line;
  QuadratureRule rule;
  for (int j = 0; j < n_per_axis; ++j)
    for (int i = 0; i < n_per_axis; ++i) {
      rule.points.push_back({line.points[i][0], line.points[j][0]});
      rule.weights.push_back(line.weights[i] * line.weights[j]);
    }
  return rule;
}

namespace {

// 1D Lagrange polynomial j on equispaced nodes k/p, k = 0..p.
double lagrange(int p, int j, double s) {
  double v = 1.0;
  const double xj = static_cast<double>(j) / p;
  for (int m = 0; m <= p; ++m) {
    if (m == j) continue;
    const double xm = static_cast<double>(m) / p;
    v *= (s - xm) / (xj - xm);
  }
  return v;
}

double lagrange_derivative(int p, int j, double s) {
  const double xj = static_cast<double>(j) / p;
  double sum = 0.0;
  for (int l = 0; l <= p; ++l) {
    if (l == j) continue;
    double term = 1.0 / (xj - static_cast<double>(l) / p);
    for (int m = 0; m <= p; ++m) {
      if (m == j || m == l) continue;
      const double xm = static_cast<double>(m) / p;
      term *= (s - xm) / (xj - xm);
    }
    sum += term;
  }
  return sum;
}

}  // namespace

FeSpace::FeSpace(Mesh mesh, int order) : mesh_(mesh), order_(order) {
  if (order < 1 || order > 4) throw Error("FeSpace: order must be in 1..4, got " + std::to_string(order));
  if (mesh.dim != 1 && mesh.dim != 2) throw Error("FeSpace: only 1D and 2D meshes are supported");
  const int p = order;
  nodes_[0] = p * mesh.cells[0] + 1;
  nodes_[1] = mesh.dim == 2 ? p * mesh.cells[1] + 1 : 1;
  n_local_ = mesh.dim == 2 ? (p + 1) * (p + 1) : p + 1;

  const double hx = mesh.cell_size(0);
  const double hy = mesh.dim == 2 ? mesh.cell_size(1) : 0.0;
  // Lexicographic by coordinates: x first, then y.
  coords_.reserve(static_cast<std::size_t>(nodes_[0]) * nodes_[1]);
  for (int ix = 0; ix < nodes_[0]; ++ix)
    for (int iy = 0; iy < nodes_[1]; ++iy) {
      const double x = ix == nodes_[0] - 1 ? mesh.upper[0] : mesh.lower[0] + ix * hx / p;
      double y = 0.0;
      if (mesh.dim == 2) y = iy == nodes_[1] - 1 ? mesh.upper[1] : mesh.lower[1] + iy * hy / p;
      coords_.push_back({x, y});
    }

  cell_dofs_.resize(static_cast<std::size_t>(mesh.num_cells()) * n_local_);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const int cx = static_cast<int>(c % mesh.cells[0]);
    const int cy = static_cast<int>(c / mesh.cells[0]);
    for (int ly = 0; ly <= (mesh.dim == 2 ? p : 0); ++ly)
      for (int lx = 0; lx <= p; ++lx) {
        const Index gx = Index{cx} * p + lx;
        const Index gy = mesh.dim == 2 ? Index{cy} * p + ly : 0;
        const int local = ly * (p + 1) + lx;
        cell_dofs_[c * n_local_ + local] = gx * nodes_[1] + gy;
      }
  }
}

Point FeSpace::cell_origin(Index cell) const {
  const int cx = static_cast<int>(cell % mesh_.cells[0]);
  const int cy = static_cast<int>(cell / mesh_.cells[0]);
  Point o{mesh_.lower[0] + cx * mesh_.cell_size(0), 0.0};
  if (mesh_.dim == 2) o[1] = mesh_.lower[1] + cy * mesh_.cell_size(1);
  return o;
}

std::vector<Index> FeSpace::boundary_dofs() const {
  std::vector<Index> out;
  for (int ix = 0; ix < nodes_[0]; ++ix)
    for (int iy = 0; iy < nodes_[1]; ++iy) {
      bool on = ix == 0 || ix == nodes_[0] - 1;
      if (mesh_.dim == 2) on = on || iy == 0 || iy == nodes_[1] - 1;
      if (on) out.push_back(Index{ix} * nodes_[1] + iy);
    }
  return out;
}

double FeSpace::shape_value(int i, const Point& ref) const {
  const int p = order_;
  const int ix = i % (p + 1);
  double v = lagrange(p, ix, ref[0]);
  if (mesh_.dim == 2) v *= lagrange(p, i / (p + 1), ref[1]);
  return v;
}

Gradient FeSpace::shape_grad(int i, const Point& ref) const {
  const int p = order_;
  const int ix = i % (p + 1);
  if (mesh_.dim == 1) return {lagrange_derivative(p, ix, ref[0]), 0.0};
  const int iy = i / (p + 1);
  return {lagrange_derivative(p, ix, ref[0]) * lagrange(p, iy, ref[1]),
          lagrange(p, ix, ref[0]) * lagrange_derivative(p, iy, ref[1])};
}

Tabulation FeSpace::tabulate(const QuadratureRule& rule) const {
  Tabulation tab;
  tab.n_points = static_cast<int>(rule.size());
  tab.n_local = n_local_;
  tab.values.resize(rule.size() * n_local_);
  tab.grads.resize(rule.size() * n_local_);
  for (int q = 0; q < tab.n_points; ++q)
    for (int i = 0; i < n_local_; ++i) {
      tab.values[q * n_local_ + i] = shape_value(i, rule.points[q]);
      tab.grads[q * n_local_ + i] = shape_grad(i, rule.points[q]);
    }
  return tab;
}

Index FeSpace::locate(const Point& x, Point& ref, bool prefer_lower) const {
  if (!mesh_.contains(x)) {
    std::ostringstream msg;
    msg << "point (" << x[0] << ", " << x[1] << ") is outside the mesh domain";
    throw Error(msg.str());
  }
  std::array<int, 2> c{0, 0};
  for (int d = 0; d < mesh_.dim; ++d) {
    const double h = mesh_.cell_size(d);
    const double s = (x[d] - mesh_.lower[d]) / h;
    int k = static_cast<int>(std::floor(s));
    if (prefer_lower && k > 0 && std::abs(s - k) < 1e-12) --k;
    k = std::clamp(k, 0, mesh_.cells[d] - 1);
    c[d] = k;
    ref[d] = std::clamp((x[d] - mesh_.lower[d] - k * h) / h, 0.0, 1.0);
  }
  if (mesh_.dim == 1) ref[1] = 0.0;
  return Index{c[1]} * mesh_.cells[0] + c[0];
}

Point FeSpace::to_physical(Index cell, const Point& ref) const {
  Point o = cell_origin(cell);
  o[0] += ref[0] * mesh_.cell_size(0);
  if (mesh_.dim == 2) o[1] += ref[1] * mesh_.cell_size(1);
  return o;
}

std::shared_ptr<const FeSpace> build_space(const Mesh& mesh, int order) {
  return std::make_shared<const FeSpace>(mesh, order);
}

void check_length(const FeSpace& space, const NodalVector& v, const char* what) {
  if (v.size() != space.num_dofs())
    throw Error(std::string(what) + ": vector length " + std::to_string(v.size()) +
                " does not match the space (" + std::to_string(space.num_dofs()) + " dofs)");
}

NodalVector interpolate(const FeSpace& space, const ScalarField& g) {
  const auto& xs = space.dof_coordinates();
  NodalVector v(space.num_dofs());
  for (Index i = 0; i < space.num_dofs(); ++i) v[i] = g(xs[i]);
  return v;
}

double evaluate_in_cell(const FeSpace& space, const NodalVector& v, Index cell, const Point& ref) {
  const auto dofs = space.cell_dofs(cell);
  double s = 0.0;
  for (int i = 0; i < space.dofs_per_cell(); ++i) s += v[dofs[i]] * space.shape_value(i, ref);
  return s;
}

double evaluate(const FeSpace& space, const NodalVector& v, const Point& x) {
  check_length(space, v, "evaluate");
  Point ref{};
  const Index cell = space.locate(x, ref);
  return evaluate_in_cell(space, v, cell, ref);
}

Gradient evaluate_gradient(const FeSpace& space, const NodalVector& v, const Point& x) {
  check_length(space, v, "evaluate_gradient");
  Point ref{};
  const Index cell = space.locate(x, ref);
  const auto dofs = space.cell_dofs(cell);
  Gradient g{0.0, 0.0};
  for (int i = 0; i < space.dofs_per_cell(); ++i) {
    const Gradient r = space.shape_grad(i, ref);
    for (int d = 0; d < space.dim(); ++d) g[d] += v[dofs[i]] * r[d] / space.mesh().cell_size(d);
  }
  return g;
}

}  // namespace vifem
