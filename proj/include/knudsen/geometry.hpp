#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "knudsen/vec.hpp"

namespace knudsen {

enum class DomainKind { Disk, Ellipse, Ellipsoid, Star };

// Implicit bounded C^2 region D = { levelset < 0 } with exact exit times for
// the conic kinds and bracketed safeguarded-Newton roots for the star kind.
//
// Registered kinds:
//   disk(r)                 2D, levelset |x|^2 - r^2
//   ellipse(a, b)           2D, x^2/a^2 + y^2/b^2 - 1
//   ellipsoid(a, b, c)      3D, x^2/a^2 + y^2/b^2 + z^2/c^2 - 1
//   star(r0, amp, mode)     2D, |x| - r0 (1 + amp cos(mode * phi)); requires
//                           |amp| < 1/2 so the region stays star-shaped.
class Domain {
 public:
  static Domain disk(double radius);
  static Domain ellipse(double a, double b);
  static Domain ellipsoid(double a, double b, double c);
  static Domain star(double r0, double amplitude, int mode);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::string kind_name() const;

  double levelset(const Vec& x) const;
  Vec levelset_gradient(const Vec& x) const;

  double bounding_radius() const { return bounding_radius_; }
  double inradius() const { return inradius_; }
  // Diameter sup |x - y|; analytic for the conic kinds, refined boundary-pair
  // maximum inflated by a 1.001 safety factor for the star kind (the weight
  // family needs an upper-bound-consistent value).
  double diameter() const { return diameter_; }
  double volume() const { return volume_; }

  // Upper bound for the W^{1,inf} norm of an extension of x -> n_x to
  // closure(D): analytic for conics (curvature maximum), finite-difference
  // boundary Lipschitz estimate with safety factor 2 for the star kind.
  double normal_field_w1inf() const { return normal_w1inf_; }

  double tol_root() const { return 1e-12 * bounding_radius_; }
  double tol_boundary() const { return 1e-9 * bounding_radius_; }

  bool inside(const Vec& x) const { return levelset(x) < 0.0; }
  bool inside_closed(const Vec& x) const { return levelset(x) <= tol_boundary(); }

  // Exit time sigma(x, v) = inf{ t > 0 : x + t v in boundary }, with the
  // convention sigma = 0 for boundary states whose velocity does not point
  // into the gas region. v == 0 returns +infinity ("never exits").
  // Throws std::invalid_argument when x lies outside closure(D).
  double exit_time(const Vec& x, const Vec& v) const;

  struct ExitEvent {
    double sigma;
    Vec point;
    bool grazing;  // |v . n| < 1e-8 |v| at the hit
  };
  ExitEvent boundary_hit(const Vec& x, const Vec& v) const;

  // Unit inward normal at a boundary point (|levelset(x)| <= tol_boundary).
  Vec inward_normal(const Vec& x) const;

  // k points spread over the boundary, via the natural angular parametrization.
  std::vector<Vec> boundary_samples(int k) const;

  const std::vector<double>& params() const { return params_; }

  static constexpr double kNeverExits = std::numeric_limits<double>::infinity();

 private:
  Domain() = default;
  void finalize_star();

  DomainKind kind_ = DomainKind::Disk;
  int dim_ = 2;
  std::vector<double> params_;
  double bounding_radius_ = 1.0;
  double inradius_ = 1.0;
  double diameter_ = 2.0;
  double volume_ = 0.0;
  double normal_w1inf_ = 2.0;
};

}  // namespace knudsen
