#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "knudsen/geometry.hpp"
#include "knudsen/rng.hpp"
#include "knudsen/vec.hpp"

namespace knudsen {

// Scalar field over boundary positions, from a small registered catalog:
//   constant(value)
//   linear(ax, ay, az, offset)          value = a . x + offset
//   sinusoidal(mean, amplitude, mode, phase)
//                                        value = mean + amplitude cos(mode phi + phase),
//                                        phi = atan2(y, x)
struct BoundaryField {
  enum class Kind { Constant, Linear, Sinusoidal } kind = Kind::Constant;
  std::vector<double> params{1.0};

  static BoundaryField constant(double v) { return {Kind::Constant, {v}}; }
  static BoundaryField linear(double ax, double ay, double az, double offset) {
    return {Kind::Linear, {ax, ay, az, offset}};
  }
  static BoundaryField sinusoidal(double mean, double amplitude, double mode, double phase) {
    return {Kind::Sinusoidal, {mean, amplitude, mode, phase}};
  }

  double operator()(const Vec& x) const;
  std::string describe() const;
};

double c4_from_c0(double c0);

// Maxwell boundary model: wall temperature theta(x), accommodation alpha(x)
// with floor c0, and the flux-normalized wall Maxwellian M(x, v).
class WallModel {
 public:
  WallModel(const Domain& domain, BoundaryField theta, BoundaryField alpha, double c0);

  double theta(const Vec& x) const { return theta_(x); }
  double alpha(const Vec& x) const { return alpha_(x); }
  double c0() const { return c0_; }
  double c4() const { return c4_; }
  double theta_min() const { return theta_min_; }
  double theta_max() const { return theta_max_; }
  const BoundaryField& theta_field() const { return theta_; }
  const BoundaryField& alpha_field() const { return alpha_; }

  // Flux normalization constant: the reciprocal of the one-dimensional
  // half-space flux integral of the unit-mass Maxwellian at temperature t,
  // evaluated by quadrature once per distinct temperature and cached.
  double c_tilde(double t) const;

  // Wall Maxwellian M(x, v) = c_tilde(theta) / (2 pi theta)^{n/2} exp(-|v|^2 / 2 theta).
  double maxwellian(const Vec& x, const Vec& v, int dim) const;
  double maxwellian_speed(const Vec& x, double speed, int dim) const;

  struct Outgoing {
    Vec v;
    bool diffuse;
    bool grazing;
  };

  // Outgoing velocity with density M(x, v) (v . n) on {v . n > 0}: inverse-CDF
  // for the normal speed, Gaussian tangentials. Consumes a fixed number of
  // draws per call (plus one retry when the first sample comes out grazing).
  Vec sample_diffuse(const Vec& x, const Vec& n, int dim, CounterRng& rng,
                     bool* grazing = nullptr) const;

  // Maxwell kernel, pathwise: diffuse with probability alpha(x), else specular.
  // Requires v_in . n < 0 (incoming).
  Outgoing apply_boundary(const Vec& x, const Vec& v_in, const Vec& n, int dim,
                          CounterRng& rng) const;

 private:
  BoundaryField theta_;
  BoundaryField alpha_;
  double c0_;
  double c4_;
  double theta_min_;
  double theta_max_;
  mutable std::unordered_map<double, double> c_tilde_cache_;
  mutable std::mutex cache_mutex_;
};

inline Vec specular_reflect(const Vec& v, const Vec& n) {
  return v - (2.0 * dot(v, n)) * n;
}

// Orthonormal tangent frame at a boundary point with unit normal n.
void tangent_frame(const Vec& n, Vec& t1, Vec& t2);

}  // namespace knudsen
