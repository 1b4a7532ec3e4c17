// SPDX-License-Identifier: Apache-2.0
//
// Closed-form solutions and forcing terms for the benchmark problems.

#pragma once

#include <functional>

#include "vifem/mesh_fe.hpp"

namespace vifem::manufactured {

struct ExactSolution {
  std::function<double(const Point&, double)> value;
  std::function<Gradient(const Point&, double)> gradient;
  /// Forcing of the first equation; empty when the problem is unforced.
  std::function<double(const Point&, double)> source;
  /// Bilaplacian of value(., 0); empty when not needed.
  std::function<double(const Point&)> bilaplacian0;
};

/// cos(4 pi x) cos(4 pi y) on (0,1)^2 for u = div((1+x) grad w) + f1, w = -lap u.
ExactSolution stationary_smooth();

/// (1 + cos x cos y) cos t on (0, 2 pi)^2 for u_t = div(u grad w) + f1, w = -lap u.
ExactSolution lubrication();

/// cos x cos y cos t on (0, 2 pi)^2 for u_t = div((1-u^2) grad w) + f1,
/// w = -lap u + u^3 - u.
ExactSolution cahn_hilliard();

/// (cos x cos y - 3/(8 pi) x^4 + x^3) cos t on (0, 2 pi)^2 for
/// u_t = div((1+u) grad u) + f1.
ExactSolution second_order();

/// Self-similar solution of u_t = (u^m)_xx, shifted by one time unit.
ExactSolution barenblatt(double m);

/// 0.8 - cos(pi x) + 0.25 cos(2 pi x) on (-1, 1) and its fourth derivative.
double thin_film_initial(double x);
double thin_film_initial_bilaplacian(double x);

}  // namespace vifem::manufactured
