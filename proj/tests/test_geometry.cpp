#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "knudsen/geometry.hpp"
#include "knudsen/rng.hpp"
#include "oracles.hpp"

using namespace knudsen;

namespace {

Vec random_interior(const Domain& d, CounterRng& rng, double margin = 1e-4) {
  double R = d.bounding_radius();
  while (true) {
    Vec x{(2.0 * rng.next_double() - 1.0) * R, (2.0 * rng.next_double() - 1.0) * R, 0.0};
    if (d.dim() == 3) x.z = (2.0 * rng.next_double() - 1.0) * R;
    if (d.levelset(x) < -margin) return x;
  }
}

Vec random_direction(const Domain& d, CounterRng& rng) {
  if (d.dim() == 2) {
    double phi = 2.0 * M_PI * rng.next_double();
    return {std::cos(phi), std::sin(phi), 0.0};
  }
  double ct = 2.0 * rng.next_double() - 1.0;
  double st = std::sqrt(1.0 - ct * ct);
  double phi = 2.0 * M_PI * rng.next_double();
  return {st * std::cos(phi), st * std::sin(phi), ct};
}

}  // namespace

TEST_CASE("exit time on the unit disk: axis and chord rays") {
  Domain d = Domain::disk(1.0);
  CHECK(d.exit_time({0, 0, 0}, {1, 0, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.exit_time({0.6, 0, 0}, {-1, 0, 0}) == doctest::Approx(1.6).epsilon(1e-14));
}

TEST_CASE("exit time on the ellipse matches the bisection oracle") {
  Domain d = Domain::ellipse(2.0, 1.0);
  Vec x{0, 0, 0};
  Vec v{std::cos(0.7), std::sin(0.7), 0.0};
  double sigma = d.exit_time(x, v);
  double ref = oracles::bisect_exit_time(d, x, v);
  CHECK(std::abs(sigma - ref) < 1e-9);
}

TEST_CASE("exit time conventions") {
  Domain d = Domain::disk(1.0);
  SUBCASE("zero velocity never exits") {
    CHECK(std::isinf(d.exit_time({0.3, 0.2, 0}, {0, 0, 0})));
  }
  SUBCASE("points outside the closed domain are rejected") {
    CHECK_THROWS_AS(d.exit_time({1.5, 0, 0}, {1, 0, 0}), std::invalid_argument);
  }
  SUBCASE("boundary states with outgoing or tangent velocity have sigma = 0") {
    CHECK(d.exit_time({1, 0, 0}, {1, 0, 0}) == 0.0);
    CHECK(d.exit_time({1, 0, 0}, {0, 1, 0}) == 0.0);
  }
  SUBCASE("boundary states moving inward cross the full chord") {
    CHECK(d.exit_time({1, 0, 0}, {-1, 0, 0}) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("inward normals") {
  Domain d = Domain::disk(1.0);
  Vec n1 = d.inward_normal({1, 0, 0});
  CHECK(n1.x == doctest::Approx(-1.0));
  CHECK(n1.y == doctest::Approx(0.0));
  Vec n2 = d.inward_normal({0, -1, 0});
  CHECK(n2.y == doctest::Approx(1.0));

  Domain e = Domain::ellipse(2.0, 1.0);
  Vec n3 = e.inward_normal({2, 0, 0});
  CHECK(n3.x == doctest::Approx(-1.0));

  SUBCASE("normals agree with finite-difference gradients") {
    CounterRng rng(7, 1);
    for (const Domain& dom :
         {Domain::disk(1.0), Domain::ellipse(2.0, 1.0), Domain::star(1.0, 0.1, 5)}) {
      for (const Vec& b : dom.boundary_samples(64)) {
        Vec n = dom.inward_normal(b);
        CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-12));
        Vec g = normalized(oracles::fd_gradient(dom, b));
        CHECK(dot(n, g) == doctest::Approx(-1.0).epsilon(1e-6));
        // stepping inward strictly decreases the level set
        CHECK(dom.levelset(b + 1e-6 * n) < dom.levelset(b));
      }
    }
    (void)rng;
  }
}

TEST_CASE("boundary hits") {
  Domain d = Domain::disk(1.0);
  auto hit = d.boundary_hit({0, 0, 0}, {0, 2, 0});
  CHECK(hit.point.x == doctest::Approx(0.0));
  CHECK(hit.point.y == doctest::Approx(1.0).epsilon(1e-13));

  auto hit2 = d.boundary_hit({0.5, 0, 0}, {0, -1, 0});
  CHECK(hit2.point.x == doctest::Approx(0.5));
  CHECK(hit2.point.y == doctest::Approx(-std::sqrt(0.75)).epsilon(1e-12));

  SUBCASE("star-domain hits match the bisection oracle") {
    Domain s = Domain::star(1.0, 0.1, 5);
    CounterRng rng(11, 2);
    for (int k = 0; k < 200; ++k) {
      Vec x = random_interior(s, rng);
      Vec v = (0.3 + 2.0 * rng.next_double()) * random_direction(s, rng);
      double sig = s.exit_time(x, v);
      double ref = oracles::bisect_exit_time(s, x, v);
      CHECK(std::abs(sig - ref) < 1e-9);
    }
  }
}

TEST_CASE("first-hit property on the star domain") {
  Domain s = Domain::star(1.0, 0.1, 5);
  CounterRng rng(13, 3);
  for (int k = 0; k < 100; ++k) {
    Vec x = random_interior(s, rng);
    Vec v = random_direction(s, rng);
    double sig = s.exit_time(x, v);
    for (int j = 1; j < 64; ++j) {
      double t = sig * j / 64.0;
      CHECK(s.levelset(x + t * v) < 0.0);
    }
  }
}

TEST_CASE("diameters") {
  CHECK(Domain::disk(1.0).diameter() == doctest::Approx(2.0));
  CHECK(Domain::ellipse(2.0, 1.0).diameter() == doctest::Approx(4.0));
  CHECK(Domain::ellipsoid(1.0, 0.8, 0.6).diameter() == doctest::Approx(2.0));

  SUBCASE("star-perturbed diameter against dense boundary pairs") {
    Domain s = Domain::star(1.0, 0.1, 5);
    double d = s.diameter();
    CHECK(d >= 2.0);
    CHECK(d <= 2.2);
    // dense pairwise oracle (independent parametrization sweep)
    double best = 0.0;
    int n = 3000;
    for (int i = 0; i < n; ++i) {
      double pi1 = 2.0 * M_PI * i / n;
      double r1 = 1.0 + 0.1 * std::cos(5.0 * pi1);
      for (int j = i + 1; j < n; ++j) {
        double pi2 = 2.0 * M_PI * j / n;
        double r2 = 1.0 + 0.1 * std::cos(5.0 * pi2);
        double dx = r1 * std::cos(pi1) - r2 * std::cos(pi2);
        double dy = r1 * std::sin(pi1) - r2 * std::sin(pi2);
        best = std::max(best, dx * dx + dy * dy);
      }
    }
    best = std::sqrt(best);
    CHECK(d >= best);          // upper-bound consistency
    CHECK(d <= best * 1.002);  // and tight up to the documented inflation
  }

  SUBCASE("basic shape relations") {
    for (const Domain& dom :
         {Domain::disk(1.0), Domain::ellipse(2.0, 1.0), Domain::star(1.0, 0.1, 5)}) {
      CHECK(dom.diameter() >= 2.0 * dom.inradius());
      CHECK(dom.diameter() <= 2.0 * dom.bounding_radius() * 1.001 + 1e-12);
      CHECK(dom.inradius() > 0.0);
    }
  }
}

TEST_CASE("directional derivative identity v . grad sigma = -1") {
  for (const Domain& d :
       {Domain::disk(1.0), Domain::ellipse(2.0, 1.0), Domain::star(1.0, 0.1, 5),
        Domain::ellipsoid(1.0, 0.8, 0.6)}) {
    CounterRng rng(17, 4);
    int tested = 0;
    double worst = 0.0;
    while (tested < 1000) {
      Vec x = random_interior(d, rng, 1e-3);
      double speed = 0.3 + 2.0 * rng.next_double();
      Vec v = speed * random_direction(d, rng);
      double sigma = d.exit_time(x, v);
      Vec q = x + sigma * v;
      Vec nq = d.inward_normal(q);
      if (std::abs(dot(v, nq)) <= 0.1 * speed) continue;  // skip grazing hits
      ++tested;
      double h = 1e-6;
      Vec e[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
      double acc = 0.0;
      for (int a = 0; a < d.dim(); ++a) {
        double sp = d.exit_time(x + h * e[a], v);
        double sm = d.exit_time(x - h * e[a], v);
        double partial = (sp - sm) / (2.0 * h);
        acc += partial * (a == 0 ? v.x : a == 1 ? v.y : v.z);
      }
      worst = std::max(worst, std::abs(acc + 1.0));
    }
    INFO("domain ", d.kind_name(), " worst deviation ", worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("chord bound and scaling") {
  for (const Domain& d :
       {Domain::disk(1.0), Domain::ellipse(2.0, 1.0), Domain::star(1.0, 0.1, 5)}) {
    CounterRng rng(19, 5);
    for (int k = 0; k < 1000; ++k) {
      Vec x = random_interior(d, rng);
      double speed = 0.2 + 3.0 * rng.next_double();
      Vec v = speed * random_direction(d, rng);
      double sig = d.exit_time(x, v);
      double sig_back = d.exit_time(x, -1.0 * v);
      CHECK(sig + sig_back <= d.diameter() / speed + 1e-9);
      double lambda = 0.5 + 2.0 * rng.next_double();
      CHECK(d.exit_time(x, lambda * v) ==
            doctest::Approx(sig / lambda).epsilon(1e-10));
    }
  }
}

TEST_CASE("oracle equivalence across registered domains") {
  for (const Domain& d :
       {Domain::disk(1.0), Domain::ellipse(2.0, 1.0), Domain::star(1.0, 0.1, 5),
        Domain::ellipsoid(1.0, 0.8, 0.6)}) {
    CounterRng rng(23, 6);
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
      Vec x = random_interior(d, rng);
      Vec v = (0.25 + 3.0 * rng.next_double()) * random_direction(d, rng);
      worst = std::max(worst, std::abs(d.exit_time(x, v) - oracles::bisect_exit_time(d, x, v)));
    }
    INFO("domain ", d.kind_name(), " worst |sigma - oracle| ", worst);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("degenerate star parameters are rejected") {
  CHECK_THROWS_AS(Domain::star(1.0, 0.6, 3), std::invalid_argument);
  CHECK_THROWS_AS(Domain::disk(-1.0), std::invalid_argument);
}
