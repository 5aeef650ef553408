#pragma once

// Test-only oracles, deliberately independent of the library implementation
// paths they check: pure grid-march + bisection for exit times, central
// differences for gradients, and brute-force quadratures for wall moments.

#include <cmath>
#include <functional>

#include "knudsen/geometry.hpp"
#include "knudsen/vec.hpp"

namespace oracles {

using knudsen::Domain;
using knudsen::Vec;

// First boundary crossing by marching a fine grid and bisecting the bracket
// down to 1e-12. Grid is finer than (and coprime to) the implementation's.
inline double bisect_exit_time(const Domain& d, const Vec& x, const Vec& v,
                               int grid = 8191) {
  double speed = knudsen::norm(v);
  double t_hi = (d.diameter() + d.inradius()) / speed;
  double prev = 0.0;
  for (int k = 1; k <= grid; ++k) {
    double t = t_hi * k / grid;
    if (d.levelset(x + t * v) >= 0.0) {
      double lo = prev, hi = t;
      while (hi - lo > 1e-12) {
        double m = 0.5 * (lo + hi);
        if (d.levelset(x + m * v) >= 0.0) hi = m;
        else lo = m;
      }
      return 0.5 * (lo + hi);
    }
    prev = t;
  }
  return t_hi;
}

inline Vec fd_gradient(const Domain& d, const Vec& x, double h = 1e-7) {
  auto f = [&](const Vec& p) { return d.levelset(p); };
  return {(f({x.x + h, x.y, x.z}) - f({x.x - h, x.y, x.z})) / (2 * h),
          (f({x.x, x.y + h, x.z}) - f({x.x, x.y - h, x.z})) / (2 * h),
          (f({x.x, x.y, x.z + h}) - f({x.x, x.y, x.z - h})) / (2 * h)};
}

// Composite-Simpson quadrature on [a, b]; coarse but independent.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int panels = 4096) {
  double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return acc * h / 3.0;
}

}  // namespace oracles
