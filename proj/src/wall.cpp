#include "knudsen/wall.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "knudsen/quadrature.hpp"

namespace knudsen {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kGrazingTol = 1e-10;
}

double BoundaryField::operator()(const Vec& x) const {
  switch (kind) {
    case Kind::Constant:
      return params[0];
    case Kind::Linear:
      return params[0] * x.x + params[1] * x.y + params[2] * x.z + params[3];
    case Kind::Sinusoidal: {
      double phi = std::atan2(x.y, x.x);
      return params[0] + params[1] * std::cos(params[2] * phi + params[3]);
    }
  }
  return 0.0;
}

std::string BoundaryField::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant: os << "constant(" << params[0] << ")"; break;
    case Kind::Linear:
      os << "linear(" << params[0] << "," << params[1] << "," << params[2] << ";"
         << params[3] << ")";
      break;
    case Kind::Sinusoidal:
      os << "sinusoidal(mean=" << params[0] << ",amp=" << params[1] << ",mode="
         << params[2] << ",phase=" << params[3] << ")";
      break;
  }
  return os.str();
}

double c4_from_c0(double c0) {
  if (!(c0 > 0.0 && c0 < 1.0))
    throw std::invalid_argument("wall.c0: must lie in (0,1)");
  return 1.0 - std::pow(1.0 - c0, 0.25);
}

WallModel::WallModel(const Domain& domain, BoundaryField theta, BoundaryField alpha, double c0)
    : theta_(std::move(theta)), alpha_(std::move(alpha)), c0_(c0), c4_(c4_from_c0(c0)) {
  theta_min_ = std::numeric_limits<double>::infinity();
  theta_max_ = 0.0;
  for (const Vec& x : domain.boundary_samples(512)) {
    double t = theta_(x);
    if (!(t > 0.0))
      throw std::invalid_argument("wall.theta: must be positive on the boundary");
    double a = alpha_(x);
    if (a < c0_ - 1e-12 || a > 1.0 + 1e-12)
      throw std::invalid_argument("wall.alpha: must lie in [c0, 1] on the boundary");
    theta_min_ = std::min(theta_min_, t);
    theta_max_ = std::max(theta_max_, t);
  }
}

double WallModel::c_tilde(double t) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = c_tilde_cache_.find(t);
    if (it != c_tilde_cache_.end()) return it->second;
  }
  // 1D reduced half-space flux: int_0^inf u (2 pi t)^{-1/2} exp(-u^2/2t) du.
  double cut = 16.0 * std::sqrt(t);
  double flux = integrate(
      [t](double u) { return u / std::sqrt(2.0 * kPi * t) * std::exp(-u * u / (2.0 * t)); },
      0.0, cut, 1e-14 * std::sqrt(t));
  double value = 1.0 / flux;
  std::lock_guard<std::mutex> lock(cache_mutex_);
  c_tilde_cache_.emplace(t, value);
  return value;
}

double WallModel::maxwellian_speed(const Vec& x, double speed, int dim) const {
  double t = theta_(x);
  return c_tilde(t) / std::pow(2.0 * kPi * t, 0.5 * dim) * std::exp(-speed * speed / (2.0 * t));
}

double WallModel::maxwellian(const Vec& x, const Vec& v, int dim) const {
  return maxwellian_speed(x, norm(v), dim);
}

void tangent_frame(const Vec& n, Vec& t1, Vec& t2) {
  // pick the axis least aligned with n to seed the frame
  Vec seed{1.0, 0.0, 0.0};
  double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
  if (ay <= ax && ay <= az) seed = {0.0, 1.0, 0.0};
  else if (az <= ax && az <= ay) seed = {0.0, 0.0, 1.0};
  t1 = normalized(cross(n, seed));
  t2 = cross(n, t1);
}

Vec WallModel::sample_diffuse(const Vec& x, const Vec& n, int dim, CounterRng& rng,
                              bool* grazing) const {
  double t = theta_(x);
  Vec t1, t2;
  if (dim == 2) {
    t1 = {-n.y, n.x, 0.0};
  } else {
    tangent_frame(n, t1, t2);
  }
  Vec v;
  bool flagged = false;
  for (int attempt = 0; attempt < 2; ++attempt) {
    // normal speed from the flux-weighted law: CDF 1 - exp(-u^2 / 2 theta)
    double u = std::sqrt(-2.0 * t * std::log(rng.next_double()));
    double u1 = rng.next_double();
    double u2 = rng.next_double();
    double g1 = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    double g2 = std::sqrt(-2.0 * std::log(u1)) * std::sin(2.0 * kPi * u2);
    double s = std::sqrt(t);
    if (dim == 2) {
      v = u * n + (s * g1) * t1;
    } else {
      v = u * n + (s * g1) * t1 + (s * g2) * t2;
    }
    if (u >= kGrazingTol) {
      if (grazing) *grazing = flagged;
      return v;
    }
    flagged = true;  // resample once, then accept with flag
  }
  if (grazing) *grazing = true;
  return v;
}

WallModel::Outgoing WallModel::apply_boundary(const Vec& x, const Vec& v_in, const Vec& n,
                                              int dim, CounterRng& rng) const {
  double vn = dot(v_in, n);
  if (vn >= 0.0)
    throw std::invalid_argument("apply_boundary: velocity is not incoming (v.n >= 0)");
  double coin = rng.next_double();
  if (coin < alpha_(x)) {
    bool grazing = false;
    Vec v = sample_diffuse(x, n, dim, rng, &grazing);
    return {v, true, grazing};
  }
  Vec v = specular_reflect(v_in, n);
  bool grazing = dot(v, n) < kGrazingTol * norm(v);
  return {v, false, grazing};
}

}  // namespace knudsen
