#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "knudsen/geometry.hpp"
#include "knudsen/quadrature.hpp"
#include "knudsen/rng.hpp"
#include "knudsen/wall.hpp"

namespace knudsen {

// Weighted particle cloud representing an empirical measure on D x R^n.
// Structure-of-arrays; per-particle counter-based RNG streams make the
// evolution independent of scheduling and replayable from checkpoints.
struct Ensemble {
  int dim = 2;
  double clock = 0.0;
  double total_mass = 1.0;
  std::uint64_t seed = 0;
  std::vector<Vec> x;
  std::vector<Vec> v;
  std::vector<double> weight;
  std::vector<std::uint64_t> rng_counter;   // evolution-stream position
  std::vector<std::uint32_t> n_diffuse;
  std::vector<std::uint32_t> n_specular;
  std::vector<std::uint32_t> n_grazing;
  std::vector<std::uint8_t> alive;          // absorbing runs kill particles
  std::vector<double> death_time;

  std::size_t size() const { return x.size(); }
  double mass() const;
  std::uint64_t total_events() const;
};

// Initial-data catalog. All entries have unit mass; sampling is i.i.d. and
// deterministic in (seed, n_particles).
struct InitialData {
  enum class Kind {
    UniformMaxwellian,      // x uniform on D, v ~ N(0, theta0 I)
    HalfDomainMaxwellian,   // x uniform on D intersect {x1 < 0}, v ~ N(0, theta0 I)
    UniformAnnulusSpeed,    // x uniform on D, |v| uniform on [vmin, vmax], direction uniform
    Equilibrium,            // x uniform on D, v ~ N(0, theta I)
    ProductGrid             // x uniform on D, |v| from a user speed histogram
  };
  Kind kind = Kind::Equilibrium;
  double theta0 = 1.0;
  double vmin = 1.0, vmax = 2.0;
  std::vector<double> speed_edges;    // ProductGrid
  std::vector<double> speed_weights;  // ProductGrid, nonnegative

  static InitialData uniform_maxwellian(double theta0) {
    InitialData d;
    d.kind = Kind::UniformMaxwellian;
    d.theta0 = theta0;
    return d;
  }
  static InitialData half_domain_maxwellian(double theta0) {
    InitialData d;
    d.kind = Kind::HalfDomainMaxwellian;
    d.theta0 = theta0;
    return d;
  }
  static InitialData annulus_speed(double vmin, double vmax);
  static InitialData equilibrium(double theta) {
    InitialData d;
    d.kind = Kind::Equilibrium;
    d.theta0 = theta;
    return d;
  }
  static InitialData product_grid(std::vector<double> edges, std::vector<double> weights);

  std::string kind_name() const;
};

Ensemble sample_initial(const InitialData& data, const Domain& domain,
                        std::size_t n_particles, std::uint64_t seed);

struct AdvanceOptions {
  int workers = 1;
  std::uint64_t max_events = 10'000'000;  // per particle per call
};

// Problem (1): free flight + Maxwell wall events until each particle's local
// clock reaches dt. Statistical weights are untouched (mass conservation is
// structural); positions stay in closure(D).
void advance(Ensemble& ens, double dt, const Domain& domain, const WallModel& wall,
             const AdvanceOptions& opts = {});

// Problem (2): free flight with absorption at the first boundary hit.
void absorbing_evolve(Ensemble& ens, double dt, const Domain& domain,
                      const AdvanceOptions& opts = {});

struct MassEstimate {
  double value = 0.0;
  double error = 0.0;  // block-based quasi-Monte Carlo error bound (3 sigma-equivalent)
};

// Surviving mass of Problem (2) at time t: quasi-Monte Carlo quadrature of the
// survival set {sigma(y, w) > t} under the initial density (Halton nodes).
MassEstimate absorbing_mass(const InitialData& data, double t, const Domain& domain,
                            std::uint64_t n_nodes = 1 << 20);

// Quadrature of a weight function against the initial density, same nodes as
// absorbing_mass; used for the absorbing-bound norms |f0|_m.
template <typename F>
MassEstimate initial_expectation(const InitialData& data, const Domain& domain, F&& f,
                                 std::uint64_t n_nodes = 1 << 20);

// Versioned binary checkpoint; round-trips the ensemble bit-for-bit. The
// resolved config (JSON text) rides along so a resume needs no extra inputs.
void save_checkpoint(const Ensemble& ens, std::uint64_t config_hash,
                     const std::string& config_json, const std::string& path);
Ensemble load_checkpoint(const std::string& path, std::uint64_t* config_hash_out = nullptr,
                         std::string* config_json_out = nullptr);

namespace detail {
// Maps a point of the unit cube to an initial-data sample; used by both the
// Halton quadratures and (with RNG-fed coordinates) the ensemble sampler.
// Returns false when the spatial proposal falls outside the domain.
bool map_unit_point(const InitialData& data, const Domain& domain, const double* u,
                    Vec& x_out, Vec& v_out);
int unit_dim(const InitialData& data, int domain_dim);
}  // namespace detail

template <typename F>
MassEstimate initial_expectation(const InitialData& data, const Domain& domain, F&& f,
                                 std::uint64_t n_nodes) {
  static const unsigned bases[6] = {2, 3, 5, 7, 11, 13};
  int du = detail::unit_dim(data, domain.dim());
  const int n_blocks = 32;
  std::vector<double> block_sum(n_blocks, 0.0), block_cnt(n_blocks, 0.0);
  double u[6];
  for (std::uint64_t i = 0; i < n_nodes; ++i) {
    for (int d = 0; d < du; ++d) u[d] = halton(i + 1, bases[d]);
    Vec x, v;
    int b = static_cast<int>(i % n_blocks);
    if (detail::map_unit_point(data, domain, u, x, v)) {
      block_sum[b] += f(x, v);
      block_cnt[b] += 1.0;
    }
  }
  double total = 0.0, count = 0.0;
  for (int b = 0; b < n_blocks; ++b) { total += block_sum[b]; count += block_cnt[b]; }
  double mean = (count > 0.0) ? total / count : 0.0;
  double var = 0.0;
  for (int b = 0; b < n_blocks; ++b) {
    double m = (block_cnt[b] > 0.0) ? block_sum[b] / block_cnt[b] : mean;
    var += (m - mean) * (m - mean);
  }
  var /= n_blocks * (n_blocks - 1);
  return {mean, 3.0 * std::sqrt(var)};
}

}  // namespace knudsen
