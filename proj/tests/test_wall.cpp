#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "knudsen/geometry.hpp"
#include "knudsen/rng.hpp"
#include "knudsen/stats.hpp"
#include "knudsen/wall.hpp"
#include "oracles.hpp"

using namespace knudsen;

namespace {

WallModel make_wall(const Domain& d, double theta, double alpha, double c0) {
  return WallModel(d, BoundaryField::constant(theta), BoundaryField::constant(alpha), c0);
}

// half-space flux of M against |v.n| reduced to 1D speed quadrature:
// 2D angular factor 2, 3D angular factor pi
double flux_quadrature(const WallModel& wall, const Vec& x, int n, double theta) {
  double angular = (n == 2) ? 2.0 : M_PI;
  return angular * oracles::simpson(
                       [&](double s) { return wall.maxwellian_speed(x, s, n) * std::pow(s, n); },
                       0.0, 16.0 * std::sqrt(theta), 8192);
}

}  // namespace

TEST_CASE("c4 from c0") {
  CHECK(c4_from_c0(15.0 / 16.0) == doctest::Approx(0.5).epsilon(1e-14));
  // closed-form inversion, cross-checked by substitution
  double c4 = c4_from_c0(0.5);
  CHECK(c4 == doctest::Approx(1.0 - std::pow(0.5, 0.25)).epsilon(1e-14));
  CHECK(std::pow(1.0 - c4, 4.0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(c4_from_c0(0.999999) > 0.96);
  CHECK_THROWS_AS(c4_from_c0(0.0), std::invalid_argument);
  CHECK_THROWS_AS(c4_from_c0(1.0), std::invalid_argument);
  CHECK_THROWS_AS(c4_from_c0(1.5), std::invalid_argument);
}

TEST_CASE("flux normalization of the wall Maxwellian") {
  for (int n : {2, 3}) {
    Domain d = (n == 2) ? Domain::disk(1.0) : Domain::ellipsoid(1.0, 1.0, 1.0);
    Vec xb = d.boundary_samples(8)[0];
    for (double theta : {0.25, 1.0, 4.0}) {
      WallModel wall = make_wall(d, theta, 1.0, 0.5);
      double flux = flux_quadrature(wall, xb, n, theta);
      INFO("theta ", theta, " n ", n);
      CHECK(std::abs(flux - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("c_tilde against the 1D reduced-flux quadrature oracle") {
  Domain d = Domain::disk(1.0);
  for (double theta : {0.25, 1.0, 4.0}) {
    WallModel wall = make_wall(d, theta, 1.0, 0.5);
    double oracle_flux = oracles::simpson(
        [&](double u) {
          return u / std::sqrt(2.0 * M_PI * theta) * std::exp(-u * u / (2.0 * theta));
        },
        0.0, 16.0 * std::sqrt(theta), 8192);
    CHECK(wall.c_tilde(theta) == doctest::Approx(1.0 / oracle_flux).epsilon(1e-11));
  }
  // theta = 1, n = 2: M(x, 0) = c_tilde / (2 pi)
  WallModel wall = make_wall(d, 1.0, 1.0, 0.5);
  double m0 = wall.maxwellian({1, 0, 0}, {0, 0, 0}, 2);
  CHECK(m0 == doctest::Approx(wall.c_tilde(1.0) / (2.0 * M_PI)).epsilon(1e-13));
}

TEST_CASE("radial symmetry of M") {
  Domain d = Domain::disk(1.0);
  WallModel wall = make_wall(d, 0.7, 1.0, 0.5);
  Vec x{1, 0, 0};
  Vec v{0.4, -1.1, 0.0};
  double s = norm(v);
  // any rotation of v leaves M unchanged, exactly
  for (double phi : {0.3, 1.2, 2.9, 4.4}) {
    Vec r{s * std::cos(phi), s * std::sin(phi), 0.0};
    CHECK(wall.maxwellian(x, v, 2) == wall.maxwellian(x, r, 2));
  }
}

TEST_CASE("diffuse sampler: support, mean flux and KS against the closed-form CDF") {
  Domain d = Domain::disk(1.0);
  const double theta = 1.0;
  WallModel wall = make_wall(d, theta, 1.0, 0.5);
  Vec xb{1, 0, 0};
  Vec n = d.inward_normal(xb);
  CounterRng rng(101, 0);

  const std::size_t N = 1000000;
  double mean_un = 0.0, mean_v2 = 0.0, var_un = 0.0;
  std::vector<double> normal_speeds;
  normal_speeds.reserve(100000);
  bool all_positive = true;
  for (std::size_t i = 0; i < N; ++i) {
    Vec v = wall.sample_diffuse(xb, n, 2, rng);
    double un = dot(v, n);
    all_positive = all_positive && un > 0.0;
    mean_un += un;
    mean_v2 += norm2(v);
    var_un += un * un;
    if (i < 100000) normal_speeds.push_back(un);
  }
  CHECK(all_positive);
  mean_un /= N;
  mean_v2 /= N;
  var_un = var_un / N - mean_un * mean_un;

  // quadrature oracle: E[u] = int u^2 e^{-u^2/2} du / int u e^{-u^2/2} du
  double num = oracles::simpson(
      [&](double u) { return u * u * std::exp(-u * u / (2 * theta)); }, 0, 16, 8192);
  double den = oracles::simpson(
      [&](double u) { return u * std::exp(-u * u / (2 * theta)); }, 0, 16, 8192);
  double expect = num / den;
  double se = std::sqrt(var_un / N);
  CHECK(std::abs(mean_un - expect) < 3.0 * se);

  // E[|v|^2] against the quadrature value (normal plus one 2D tangential)
  double e_u2 = oracles::simpson(
                    [&](double u) { return u * u * u * std::exp(-u * u / (2 * theta)); }, 0, 16,
                    8192) /
                den;
  double expect_v2 = e_u2 + theta;
  CHECK(mean_v2 == doctest::Approx(expect_v2).epsilon(0.01));

  // KS of the normal-speed sample against 1 - exp(-u^2 / 2 theta)
  std::vector<double> grid, cdf;
  for (int k = 0; k <= 6000; ++k) {
    double u = 8.0 * k / 6000.0;
    grid.push_back(u);
    cdf.push_back(1.0 - std::exp(-u * u / (2.0 * theta)));
  }
  double ks = ks_statistic_vs_cdf(normal_speeds, grid, cdf);
  double crit = 1.6276 / std::sqrt(static_cast<double>(normal_speeds.size()));
  CHECK(ks < crit);
}

TEST_CASE("specular reflection") {
  Vec eta = specular_reflect({1, -1, 0}, {0, 1, 0});
  CHECK(eta.x == doctest::Approx(1.0));
  CHECK(eta.y == doctest::Approx(1.0));

  // tangent velocities are fixed points
  Vec t = specular_reflect({1, 0, 0}, {0, 1, 0});
  CHECK(t.x == doctest::Approx(1.0));
  CHECK(t.y == doctest::Approx(0.0));

  CounterRng rng(5, 9);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    double phi = 2 * M_PI * rng.next_double();
    Vec n{std::cos(phi), std::sin(phi), 0};
    Vec v{3 * (rng.next_double() - 0.5), 3 * (rng.next_double() - 0.5), 0};
    Vec r = specular_reflect(v, n);
    worst = std::max(worst, std::abs(norm2(r) - norm2(v)) / norm2(v));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("apply_boundary mixture") {
  Domain d = Domain::disk(1.0);
  Vec xb{1, 0, 0};
  Vec n{-1, 0, 0};

  SUBCASE("incoming contract is enforced") {
    WallModel wall = make_wall(d, 1.0, 0.5, 0.25);
    CounterRng rng(1, 1);
    CHECK_THROWS_AS(wall.apply_boundary(xb, {-1.0, 0.2, 0}, n, 2, rng),
                    std::invalid_argument);
  }

  SUBCASE("alpha = 1 outgoing speeds follow the flux Maxwellian") {
    WallModel wall = make_wall(d, 1.0, 1.0, 0.5);
    CounterRng rng(3, 1);
    std::vector<double> speeds;
    bool all_diffuse = true, all_outgoing = true;
    for (int k = 0; k < 100000; ++k) {
      auto out = wall.apply_boundary(xb, {1.0, 0.3, 0}, n, 2, rng);
      all_diffuse = all_diffuse && out.diffuse;
      all_outgoing = all_outgoing && dot(out.v, n) > 0.0;
      speeds.push_back(norm(out.v));
    }
    CHECK(all_diffuse);
    CHECK(all_outgoing);
    // speed marginal of the outgoing law: density ~ s^2 exp(-s^2/2) in 2D
    auto rho = [](double s) { return s * s * std::exp(-0.5 * s * s); };
    double total = oracles::simpson(rho, 0, 12, 8192);
    std::vector<double> grid, cdf;
    double acc = 0.0;
    int K = 6000;
    grid.push_back(0.0);
    cdf.push_back(0.0);
    for (int k = 1; k <= K; ++k) {
      double s0 = 12.0 * (k - 1) / K, s1 = 12.0 * k / K;
      acc += oracles::simpson(rho, s0, s1, 8);
      grid.push_back(s1);
      cdf.push_back(acc / total);
    }
    double ks = ks_statistic_vs_cdf(speeds, grid, cdf);
    CHECK(ks < 1.6276 / std::sqrt(100000.0));
  }

  SUBCASE("alpha = 0.5 diffuse fraction is Bernoulli(0.5)") {
    WallModel wall = make_wall(d, 1.0, 0.5, 0.25);
    CounterRng rng(4, 1);
    std::size_t N = 1000000, diffuse = 0;
    bool all_outgoing = true;
    for (std::size_t k = 0; k < N; ++k) {
      auto out = wall.apply_boundary(xb, {2.0, -0.4, 0}, n, 2, rng);
      if (out.diffuse) ++diffuse;
      all_outgoing = all_outgoing && dot(out.v, n) > 0.0;
    }
    CHECK(all_outgoing);
    double frac = static_cast<double>(diffuse) / N;
    CHECK(std::abs(frac - 0.5) < 3.0 * 0.5 / std::sqrt(static_cast<double>(N)));
  }

  SUBCASE("specular branch conserves energy per event") {
    WallModel wall = make_wall(d, 1.0, 0.5, 0.25);
    CounterRng rng(6, 1);
    double worst = 0.0;
    for (int k = 0; k < 20000; ++k) {
      Vec v{0.5 + rng.next_double(), 2.0 * rng.next_double() - 1.0, 0};
      if (dot(v, n) >= 0) continue;
      auto out = wall.apply_boundary(xb, v, n, 2, rng);
      if (!out.diffuse)
        worst = std::max(worst, std::abs(norm2(out.v) - norm2(v)) / norm2(v));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("kernel flux identity by quadrature") {
  // int_{v.n>0} K gamma (v.n) dv == int_{v.n<0} gamma |v.n| dv for a fixed
  // non-radial incoming distribution gamma
  Domain d = Domain::disk(1.0);
  const double alpha = 0.6;
  WallModel wall(d, BoundaryField::constant(1.3), BoundaryField::constant(alpha), 0.5);
  Vec xb{1, 0, 0};
  Vec n{-1, 0, 0};
  Vec tangent{0, 1, 0};

  auto gamma = [&](const Vec& v) {
    return std::exp(-norm2(v) / 3.0) * (1.0 + 0.5 * dot(v, tangent) / (1.0 + norm(v)));
  };

  auto half_integral = [&](auto f, bool incoming) {
    // angle measured from n; incoming half-space is phi in (pi/2, 3pi/2)
    double lo = incoming ? M_PI / 2.0 : -M_PI / 2.0;
    double hi = incoming ? 3.0 * M_PI / 2.0 : M_PI / 2.0;
    return oracles::simpson(
        [&](double phi) {
          Vec dir = std::cos(phi) * n + std::sin(phi) * tangent;
          return oracles::simpson([&](double s) { return f(s * dir) * s; }, 0.0, 14.0, 512);
        },
        lo, hi, 512);
  };

  double rhs = half_integral([&](const Vec& v) { return gamma(v) * std::abs(dot(v, n)); }, true);
  double lhs = half_integral(
      [&](const Vec& v) {
        double kv = alpha * wall.maxwellian(xb, v, 2) * rhs +
                    (1.0 - alpha) * gamma(specular_reflect(v, n));
        return kv * dot(v, n);
      },
      false);
  CHECK(std::abs(lhs - rhs) < 1e-8);
}

TEST_CASE("wall model validation") {
  Domain d = Domain::disk(1.0);
  CHECK_THROWS_AS(make_wall(d, -1.0, 1.0, 0.5), std::invalid_argument);
  // accommodation below the floor c0
  CHECK_THROWS_AS(make_wall(d, 1.0, 0.3, 0.5), std::invalid_argument);
  // sinusoidal theta dipping negative
  CHECK_THROWS_AS(WallModel(d, BoundaryField::sinusoidal(0.5, 1.0, 3.0, 0.0),
                            BoundaryField::constant(1.0), 0.5),
                  std::invalid_argument);
  // varying alpha above the floor is accepted
  WallModel ok(d, BoundaryField::sinusoidal(1.0, 0.5, 2.0, 0.0),
               BoundaryField::sinusoidal(0.75, 0.2, 1.0, 0.0), 0.5);
  CHECK(ok.theta_min() == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(ok.theta_max() == doctest::Approx(1.5).epsilon(1e-3));
}
