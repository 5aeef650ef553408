#include "knudsen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace knudsen {

namespace {
constexpr double kPi = std::numbers::pi;

// Largest positive root of A t^2 + B t + C = 0, computed in the numerically
// stable split form. Returns a negative value when no real root exists.
double largest_quadratic_root(double A, double B, double C) {
  double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return -1.0;
  double sq = std::sqrt(disc);
  double q = -0.5 * (B + (B >= 0.0 ? sq : -sq));
  double r1 = q / A;
  double r2 = (q != 0.0) ? C / q : r1;
  return std::max(r1, r2);
}
}  // namespace

Domain Domain::disk(double radius) {
  if (radius <= 0.0) throw std::invalid_argument("domain.radius must be > 0");
  Domain d;
  d.kind_ = DomainKind::Disk;
  d.dim_ = 2;
  d.params_ = {radius};
  d.bounding_radius_ = radius;
  d.inradius_ = radius;
  d.diameter_ = 2.0 * radius;
  d.volume_ = kPi * radius * radius;
  // extension n(x) = -x / r on the closed disk
  d.normal_w1inf_ = std::max(1.0, 1.0 / radius);
  return d;
}

Domain Domain::ellipse(double a, double b) {
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("ellipse semi-axes must be > 0");
  Domain d;
  d.kind_ = DomainKind::Ellipse;
  d.dim_ = 2;
  d.params_ = {a, b};
  d.bounding_radius_ = std::max(a, b);
  d.inradius_ = std::min(a, b);
  d.diameter_ = 2.0 * std::max(a, b);
  d.volume_ = kPi * a * b;
  double amax = std::max(a, b), amin = std::min(a, b);
  d.normal_w1inf_ = std::max(1.0, amax / (amin * amin));
  return d;
}

Domain Domain::ellipsoid(double a, double b, double c) {
  if (a <= 0.0 || b <= 0.0 || c <= 0.0)
    throw std::invalid_argument("ellipsoid semi-axes must be > 0");
  Domain d;
  d.kind_ = DomainKind::Ellipsoid;
  d.dim_ = 3;
  d.params_ = {a, b, c};
  d.bounding_radius_ = std::max({a, b, c});
  d.inradius_ = std::min({a, b, c});
  d.diameter_ = 2.0 * d.bounding_radius_;
  d.volume_ = 4.0 / 3.0 * kPi * a * b * c;
  double amax = d.bounding_radius_, amin = d.inradius_;
  d.normal_w1inf_ = std::max(1.0, amax / (amin * amin));
  return d;
}

Domain Domain::star(double r0, double amplitude, int mode) {
  if (r0 <= 0.0) throw std::invalid_argument("star.r0 must be > 0");
  if (std::abs(amplitude) >= 0.5)
    throw std::invalid_argument("star.amplitude must satisfy |amp| < 0.5");
  if (mode < 1) throw std::invalid_argument("star.mode must be >= 1");
  Domain d;
  d.kind_ = DomainKind::Star;
  d.dim_ = 2;
  d.params_ = {r0, amplitude, static_cast<double>(mode)};
  d.bounding_radius_ = r0 * (1.0 + std::abs(amplitude));
  d.inradius_ = r0 * (1.0 - std::abs(amplitude));
  // area of a polar region: 1/2 int r(phi)^2 dphi
  d.volume_ = kPi * r0 * r0 * (1.0 + 0.5 * amplitude * amplitude);
  d.finalize_star();
  return d;
}

void Domain::finalize_star() {
  double r0 = params_[0], amp = params_[1];
  int mode = static_cast<int>(params_[2]);
  auto radius_at = [&](double phi) { return r0 * (1.0 + amp * std::cos(mode * phi)); };

  // diameter: coarse pairwise maximum over the boundary, locally refined,
  // then inflated by 1.001 so downstream chord bounds stay valid
  const int n = 1024;
  std::vector<double> phis(n), rx(n), ry(n);
  for (int i = 0; i < n; ++i) {
    phis[i] = 2.0 * kPi * i / n;
    double r = radius_at(phis[i]);
    rx[i] = r * std::cos(phis[i]);
    ry[i] = r * std::sin(phis[i]);
  }
  double best = 0.0;
  int bi = 0, bj = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double dx = rx[i] - rx[j], dy = ry[i] - ry[j];
      double d2 = dx * dx + dy * dy;
      if (d2 > best) { best = d2; bi = i; bj = j; }
    }
  }
  auto dist = [&](double p1, double p2) {
    double r1 = radius_at(p1), r2 = radius_at(p2);
    double dx = r1 * std::cos(p1) - r2 * std::cos(p2);
    double dy = r1 * std::sin(p1) - r2 * std::sin(p2);
    return std::sqrt(dx * dx + dy * dy);
  };
  double p1 = phis[bi], p2 = phis[bj];
  double step = 2.0 * kPi / n;
  while (step > 1e-13) {
    double d_best = dist(p1, p2);
    double c1 = p1, c2 = p2;
    for (double q1 : {p1 - step, p1, p1 + step}) {
      for (double q2 : {p2 - step, p2, p2 + step}) {
        double d = dist(q1, q2);
        if (d > d_best) { d_best = d; c1 = q1; c2 = q2; }
      }
    }
    if (c1 == p1 && c2 == p2) step *= 0.5;
    p1 = c1;
    p2 = c2;
  }
  diameter_ = 1.001 * std::max(dist(p1, p2), std::sqrt(best));

  // Lipschitz estimate of the boundary normal field, safety factor 2
  double lip = 0.0;
  Vec prev_n, prev_x;
  for (int i = 0; i <= 4096; ++i) {
    double phi = 2.0 * kPi * i / 4096;
    double r = radius_at(phi);
    Vec x{r * std::cos(phi), r * std::sin(phi), 0.0};
    Vec nx = -1.0 * normalized(levelset_gradient(x));
    if (i > 0) {
      double dn = norm(nx - prev_n);
      double dx = norm(x - prev_x);
      if (dx > 0.0) lip = std::max(lip, dn / dx);
    }
    prev_n = nx;
    prev_x = x;
  }
  normal_w1inf_ = std::max(1.0, 2.0 * lip);
}

std::string Domain::kind_name() const {
  switch (kind_) {
    case DomainKind::Disk: return "disk";
    case DomainKind::Ellipse: return "ellipse";
    case DomainKind::Ellipsoid: return "ellipsoid";
    case DomainKind::Star: return "star";
  }
  return "?";
}

double Domain::levelset(const Vec& p) const {
  switch (kind_) {
    case DomainKind::Disk: {
      double r = params_[0];
      return (p.x * p.x + p.y * p.y) - r * r;
    }
    case DomainKind::Ellipse: {
      double a = params_[0], b = params_[1];
      return p.x * p.x / (a * a) + p.y * p.y / (b * b) - 1.0;
    }
    case DomainKind::Ellipsoid: {
      double a = params_[0], b = params_[1], c = params_[2];
      return p.x * p.x / (a * a) + p.y * p.y / (b * b) + p.z * p.z / (c * c) - 1.0;
    }
    case DomainKind::Star: {
      double r0 = params_[0], amp = params_[1];
      int mode = static_cast<int>(params_[2]);
      double rho = std::sqrt(p.x * p.x + p.y * p.y);
      double phi = std::atan2(p.y, p.x);
      return rho - r0 * (1.0 + amp * std::cos(mode * phi));
    }
  }
  return 0.0;
}

Vec Domain::levelset_gradient(const Vec& p) const {
  switch (kind_) {
    case DomainKind::Disk:
      return {2.0 * p.x, 2.0 * p.y, 0.0};
    case DomainKind::Ellipse: {
      double a = params_[0], b = params_[1];
      return {2.0 * p.x / (a * a), 2.0 * p.y / (b * b), 0.0};
    }
    case DomainKind::Ellipsoid: {
      double a = params_[0], b = params_[1], c = params_[2];
      return {2.0 * p.x / (a * a), 2.0 * p.y / (b * b), 2.0 * p.z / (c * c)};
    }
    case DomainKind::Star: {
      double r0 = params_[0], amp = params_[1];
      int mode = static_cast<int>(params_[2]);
      double rho2 = p.x * p.x + p.y * p.y;
      double rho = std::sqrt(rho2);
      double phi = std::atan2(p.y, p.x);
      double dr_dphi = -r0 * amp * mode * std::sin(mode * phi);
      // grad(rho) = x / rho, grad(phi) = (-y, x) / rho^2
      return {p.x / rho + dr_dphi * p.y / rho2, p.y / rho - dr_dphi * p.x / rho2, 0.0};
    }
  }
  return {};
}

Vec Domain::inward_normal(const Vec& x) const {
  if (std::abs(levelset(x)) > tol_boundary())
    throw std::invalid_argument("inward_normal: point is not on the boundary");
  Vec g = levelset_gradient(x);
  double gn = norm(g);
  if (gn < 1e-12) throw std::invalid_argument("inward_normal: degenerate level-set gradient");
  return (-1.0 / gn) * g;
}

double Domain::exit_time(const Vec& x, const Vec& v) const {
  double xi = levelset(x);
  if (xi > tol_boundary())
    throw std::invalid_argument("exit_time: point lies outside the closed domain");
  double speed2 = norm2(v);
  if (speed2 == 0.0) return kNeverExits;

  bool on_boundary = std::abs(xi) <= tol_boundary();
  if (on_boundary) {
    // sigma = 0 unless the velocity points into the gas region
    double outward = dot(v, levelset_gradient(x));
    if (outward >= 0.0) return 0.0;
  }

  switch (kind_) {
    case DomainKind::Disk: {
      double r = params_[0];
      double A = v.x * v.x + v.y * v.y;
      double B = 2.0 * (x.x * v.x + x.y * v.y);
      double C = x.x * x.x + x.y * x.y - r * r;
      return std::max(0.0, largest_quadratic_root(A, B, C));
    }
    case DomainKind::Ellipse: {
      double a2 = params_[0] * params_[0], b2 = params_[1] * params_[1];
      double A = v.x * v.x / a2 + v.y * v.y / b2;
      double B = 2.0 * (x.x * v.x / a2 + x.y * v.y / b2);
      double C = x.x * x.x / a2 + x.y * x.y / b2 - 1.0;
      return std::max(0.0, largest_quadratic_root(A, B, C));
    }
    case DomainKind::Ellipsoid: {
      double a2 = params_[0] * params_[0], b2 = params_[1] * params_[1],
             c2 = params_[2] * params_[2];
      double A = v.x * v.x / a2 + v.y * v.y / b2 + v.z * v.z / c2;
      double B = 2.0 * (x.x * v.x / a2 + x.y * v.y / b2 + x.z * v.z / c2);
      double C = x.x * x.x / a2 + x.y * x.y / b2 + x.z * x.z / c2 - 1.0;
      return std::max(0.0, largest_quadratic_root(A, B, C));
    }
    case DomainKind::Star: {
      // First sign change of t -> levelset(x + t v) on a fine grid, then a
      // safeguarded Newton refinement within the bracket. The step is
      // inradius / 256 in space: shallow grazing excursions of the lobes are
      // far wider than this at the registered curvature bound |amp| < 1/2.
      double speed = std::sqrt(speed2);
      double h = inradius_ / (256.0 * speed);
      double t_hi = (diameter_ + inradius_) / speed;
      double t0 = 0.0;
      if (on_boundary) {
        // start the march clear of the departure wall
        double tn = 1e-7 * inradius_ / speed;
        if (levelset(x + tn * v) < 0.0) t0 = tn;
      }
      double lo = t0;
      double hi = lo;
      bool bracketed = false;
      while (hi < t_hi) {
        hi = std::min(hi + h, t_hi);
        double fhi = levelset(x + hi * v);
        if (fhi >= 0.0) {
          bracketed = true;
          // safeguarded Newton inside [lo, hi]
          double t = 0.5 * (lo + hi);
          for (int it = 0; it < 100; ++it) {
            Vec p = x + t * v;
            double f = levelset(p);
            if (f > 0.0) hi = t; else lo = t;
            double df = dot(v, levelset_gradient(p));
            double tn = (df != 0.0) ? t - f / df : 0.5 * (lo + hi);
            if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
            if (std::abs(tn - t) * speed < tol_root() || hi - lo < tol_root() / speed) {
              t = tn;
              break;
            }
            t = tn;
          }
          return std::max(t, 0.0);
        }
        lo = hi;
      }
      if (!bracketed)
        throw std::runtime_error("exit_time: no boundary crossing found (star domain)");
      return t_hi;
    }
  }
  return 0.0;
}

Domain::ExitEvent Domain::boundary_hit(const Vec& x, const Vec& v) const {
  double sigma = exit_time(x, v);
  if (sigma == kNeverExits)
    throw std::invalid_argument("boundary_hit: zero velocity never reaches the boundary");
  Vec q = x + sigma * v;
  Vec g = levelset_gradient(q);
  double gn = norm(g);
  bool grazing = false;
  if (gn > 0.0) {
    double vn = std::abs(dot(v, g)) / gn;
    grazing = vn < 1e-8 * norm(v);
  }
  return {sigma, q, grazing};
}

std::vector<Vec> Domain::boundary_samples(int k) const {
  std::vector<Vec> out;
  out.reserve(k);
  if (dim_ == 2) {
    for (int i = 0; i < k; ++i) {
      double phi = 2.0 * kPi * i / k;
      switch (kind_) {
        case DomainKind::Disk:
          out.push_back({params_[0] * std::cos(phi), params_[0] * std::sin(phi), 0.0});
          break;
        case DomainKind::Ellipse:
          out.push_back({params_[0] * std::cos(phi), params_[1] * std::sin(phi), 0.0});
          break;
        case DomainKind::Star: {
          double r = params_[0] * (1.0 + params_[1] * std::cos(params_[2] * phi));
          out.push_back({r * std::cos(phi), r * std::sin(phi), 0.0});
          break;
        }
        default: break;
      }
    }
  } else {
    int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
    for (int i = 0; i < m && static_cast<int>(out.size()) < k; ++i) {
      double theta = kPi * (i + 0.5) / m;
      for (int j = 0; j < m && static_cast<int>(out.size()) < k; ++j) {
        double phi = 2.0 * kPi * j / m;
        out.push_back({params_[0] * std::sin(theta) * std::cos(phi),
                       params_[1] * std::sin(theta) * std::sin(phi),
                       params_[2] * std::cos(theta)});
      }
    }
  }
  return out;
}

}  // namespace knudsen
