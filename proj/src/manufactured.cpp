// SPDX-License-Identifier: Apache-2.0

#include "vifem/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace vifem::manufactured {

namespace {
constexpr double pi = std::numbers::pi;
}

ExactSolution stationary_smooth() {
  ExactSolution s;
  const double k = 4.0 * pi;
  s.value = [k](const Point& p, double) { return std::cos(k * p[0]) * std::cos(k * p[1]); };
  s.gradient = [k](const Point& p, double) -> Gradient {
    return {-k * std::sin(k * p[0]) * std::cos(k * p[1]), -k * std::cos(k * p[0]) * std::sin(k * p[1])};
  };
  // w = 2 k^2 u, so f1 = u - div((1+x) grad w) = u - 2k^2 (dw/dx-term + (1+x) lap u).
  s.source = [k](const Point& p, double) {
    const double u = std::cos(k * p[0]) * std::cos(k * p[1]);
    const double ux = -k * std::sin(k * p[0]) * std::cos(k * p[1]);
    const double lap = -2.0 * k * k * u;
    return u - 2.0 * k * k * (ux + (1.0 + p[0]) * lap);
  };
  return s;
}

ExactSolution lubrication() {
  ExactSolution s;
  s.value = [](const Point& p, double t) { return (1.0 + std::cos(p[0]) * std::cos(p[1])) * std::cos(t); };
  s.gradient = [](const Point& p, double t) -> Gradient {
    return {-std::sin(p[0]) * std::cos(p[1]) * std::cos(t), -std::cos(p[0]) * std::sin(p[1]) * std::cos(t)};
  };
  s.source = [](const Point& p, double t) {
    const double cc = std::cos(p[0]) * std::cos(p[1]);
    const double sx = std::sin(p[0]) * std::cos(p[1]);
    const double sy = std::cos(p[0]) * std::sin(p[1]);
    const double ct = std::cos(t);
    return -(1.0 + cc) * std::sin(t) - 2.0 * ct * ct * (sx * sx + sy * sy) + 4.0 * (1.0 + cc) * cc * ct * ct;
  };
  s.bilaplacian0 = [](const Point& p) { return 4.0 * std::cos(p[0]) * std::cos(p[1]); };
  return s;
}

ExactSolution cahn_hilliard() {
  ExactSolution s;
  s.value = [](const Point& p, double t) { return std::cos(p[0]) * std::cos(p[1]) * std::cos(t); };
  s.gradient = [](const Point& p, double t) -> Gradient {
    return {-std::sin(p[0]) * std::cos(p[1]) * std::cos(t), -std::cos(p[0]) * std::sin(p[1]) * std::cos(t)};
  };
  s.source = [](const Point& p, double t) {
    const double ct = std::cos(t);
    const double u = std::cos(p[0]) * std::cos(p[1]) * ct;
    const double gx = -std::sin(p[0]) * std::cos(p[1]) * ct;
    const double gy = -std::cos(p[0]) * std::sin(p[1]) * ct;
    const double grad2 = gx * gx + gy * gy;
    const double lap = -2.0 * u;
    const double dw = 1.0 + 3.0 * u * u;  // w = -lap u + u^3 - u = u + u^3
    const double lap_w = dw * lap + 6.0 * u * grad2;
    const double flux_div = -2.0 * u * dw * grad2 + (1.0 - u * u) * lap_w;
    const double ut = -std::cos(p[0]) * std::cos(p[1]) * std::sin(t);
    return ut - flux_div;
  };
  s.bilaplacian0 = [](const Point& p) { return 4.0 * std::cos(p[0]) * std::cos(p[1]); };
  return s;
}

ExactSolution second_order() {
  ExactSolution s;
  const double q = 3.0 / (8.0 * pi);
  auto shape = [q](const Point& p) {
    return std::cos(p[0]) * std::cos(p[1]) - q * std::pow(p[0], 4) + std::pow(p[0], 3);
  };
  s.value = [shape](const Point& p, double t) { return shape(p) * std::cos(t); };
  s.gradient = [q](const Point& p, double t) -> Gradient {
    const double x = p[0];
    return {(-std::sin(x) * std::cos(p[1]) - 4.0 * q * x * x * x + 3.0 * x * x) * std::cos(t),
            -std::cos(x) * std::sin(p[1]) * std::cos(t)};
  };
  s.source = [shape, q](const Point& p, double t) {
    const double x = p[0];
    const double ct = std::cos(t);
    const double u = shape(p) * ct;
    const double gx = (-std::sin(x) * std::cos(p[1]) - 4.0 * q * x * x * x + 3.0 * x * x) * ct;
    const double gy = -std::cos(x) * std::sin(p[1]) * ct;
    const double lap = (-2.0 * std::cos(x) * std::cos(p[1]) - 12.0 * q * x * x + 6.0 * x) * ct;
    const double ut = -shape(p) * std::sin(t);
    return ut - (gx * gx + gy * gy + (1.0 + u) * lap);
  };
  s.bilaplacian0 = [](const Point& p) { return 4.0 * std::cos(p[0]) * std::cos(p[1]) - 9.0 / pi; };
  return s;
}

ExactSolution barenblatt(double m) {
  ExactSolution s;
  const double alpha = 1.0 / (m + 1.0);
  const double k = alpha * (m - 1.0) / (2.0 * m);
  s.value = [=](const Point& p, double t) {
    const double t0 = t + 1.0;
    const double g = 1.0 - k * p[0] * p[0] / std::pow(t0, 2.0 * alpha);
    return g > 0.0 ? std::pow(t0, -alpha) * std::pow(g, 1.0 / (m - 1.0)) : 0.0;
  };
  s.gradient = [=](const Point& p, double t) -> Gradient {
    const double t0 = t + 1.0;
    const double scale = std::pow(t0, 2.0 * alpha);
    const double g = 1.0 - k * p[0] * p[0] / scale;
    if (g <= 0.0) return {0.0, 0.0};
    const double dg = -2.0 * k * p[0] / scale;
    return {std::pow(t0, -alpha) / (m - 1.0) * std::pow(g, 1.0 / (m - 1.0) - 1.0) * dg, 0.0};
  };
  return s;
}

double thin_film_initial(double x) { return 0.8 - std::cos(pi * x) + 0.25 * std::cos(2.0 * pi * x); }

double thin_film_initial_bilaplacian(double x) {
  return std::pow(pi, 4) * (-std::cos(pi * x) + 4.0 * std::cos(2.0 * pi * x));
}

}  // namespace vifem::manufactured
