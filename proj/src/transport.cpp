#include "knudsen/transport.hpp"

#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

namespace knudsen {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kCheckpointMagic = 0x4B4E5544534B3143ULL;  // "KNUDSK1C"
constexpr std::uint32_t kCheckpointVersion = 1;

// Acklam's rational approximation of the standard normal quantile
// (relative error below 1.15e-9 over (0,1)).
double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void run_chunked(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& body) {
  if (workers <= 1 || n < 2) {
    body(0, n);
    return;
  }
  std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([&, lo, hi, w] {
      try {
        body(lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double Ensemble::mass() const { return pairwise_sum(weight); }

std::uint64_t Ensemble::total_events() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < size(); ++i)
    s += n_diffuse[i] + n_specular[i];
  return s;
}

InitialData InitialData::annulus_speed(double vmin, double vmax) {
  if (!(vmin > 0.0 && vmax > vmin))
    throw std::invalid_argument("initial.annulus_speed: requires 0 < vmin < vmax");
  InitialData d;
  d.kind = Kind::UniformAnnulusSpeed;
  d.vmin = vmin;
  d.vmax = vmax;
  return d;
}

InitialData InitialData::product_grid(std::vector<double> edges, std::vector<double> weights) {
  if (edges.size() < 2 || weights.size() != edges.size() - 1)
    throw std::invalid_argument("initial.product_grid: need k+1 edges for k weights");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0)
      throw std::invalid_argument("initial.product_grid: negative density value");
    total += w;
  }
  if (total <= 0.0)
    throw std::invalid_argument("initial.product_grid: density sums to zero");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i] <= edges[i - 1] || edges[0] < 0.0)
      throw std::invalid_argument("initial.product_grid: edges must be increasing and >= 0");
  InitialData d;
  d.kind = Kind::ProductGrid;
  d.speed_edges = std::move(edges);
  d.speed_weights = std::move(weights);
  return d;
}

std::string InitialData::kind_name() const {
  switch (kind) {
    case Kind::UniformMaxwellian: return "uniform_maxwellian";
    case Kind::HalfDomainMaxwellian: return "half_domain_maxwellian";
    case Kind::UniformAnnulusSpeed: return "annulus_speed";
    case Kind::Equilibrium: return "equilibrium";
    case Kind::ProductGrid: return "product_grid";
  }
  return "?";
}

namespace detail {

int unit_dim(const InitialData& data, int domain_dim) {
  switch (data.kind) {
    case InitialData::Kind::UniformMaxwellian:
    case InitialData::Kind::HalfDomainMaxwellian:
    case InitialData::Kind::Equilibrium:
      return 2 * domain_dim;
    case InitialData::Kind::UniformAnnulusSpeed:
    case InitialData::Kind::ProductGrid:
      return domain_dim + (domain_dim == 2 ? 2 : 3);
  }
  return 2 * domain_dim;
}

bool map_unit_point(const InitialData& data, const Domain& domain, const double* u,
                    Vec& x_out, Vec& v_out) {
  int nd = domain.dim();
  double R = domain.bounding_radius();
  Vec x{(2.0 * u[0] - 1.0) * R, (2.0 * u[1] - 1.0) * R, 0.0};
  if (nd == 3) x.z = (2.0 * u[2] - 1.0) * R;
  if (!domain.inside(x)) return false;
  if (data.kind == InitialData::Kind::HalfDomainMaxwellian && x.x >= 0.0) return false;
  const double* uv = u + nd;

  switch (data.kind) {
    case InitialData::Kind::UniformMaxwellian:
    case InitialData::Kind::HalfDomainMaxwellian:
    case InitialData::Kind::Equilibrium: {
      double s = std::sqrt(data.theta0);
      Vec v{s * inverse_normal_cdf(uv[0]), s * inverse_normal_cdf(uv[1]), 0.0};
      if (nd == 3) v.z = s * inverse_normal_cdf(uv[2]);
      x_out = x;
      v_out = v;
      return true;
    }
    case InitialData::Kind::UniformAnnulusSpeed:
    case InitialData::Kind::ProductGrid: {
      double speed;
      if (data.kind == InitialData::Kind::UniformAnnulusSpeed) {
        speed = data.vmin + (data.vmax - data.vmin) * uv[0];
      } else {
        // inverse CDF of the piecewise-constant speed histogram
        double total = 0.0;
        for (double w : data.speed_weights) total += w;
        double target = uv[0] * total;
        std::size_t k = 0;
        double acc = 0.0;
        while (k + 1 < data.speed_weights.size() && acc + data.speed_weights[k] < target) {
          acc += data.speed_weights[k];
          ++k;
        }
        double frac = (data.speed_weights[k] > 0.0)
                          ? (target - acc) / data.speed_weights[k]
                          : 0.5;
        speed = data.speed_edges[k] +
                frac * (data.speed_edges[k + 1] - data.speed_edges[k]);
      }
      Vec dir;
      if (nd == 2) {
        double phi = 2.0 * kPi * uv[1];
        dir = {std::cos(phi), std::sin(phi), 0.0};
      } else {
        double ct = 2.0 * uv[1] - 1.0;
        double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        double phi = 2.0 * kPi * uv[2];
        dir = {st * std::cos(phi), st * std::sin(phi), ct};
      }
      x_out = x;
      v_out = speed * dir;
      return true;
    }
  }
  return false;
}

}  // namespace detail

Ensemble sample_initial(const InitialData& data, const Domain& domain,
                        std::size_t n_particles, std::uint64_t seed) {
  Ensemble ens;
  ens.dim = domain.dim();
  ens.seed = seed;
  ens.total_mass = 1.0;
  ens.x.resize(n_particles);
  ens.v.resize(n_particles);
  ens.weight.assign(n_particles, 1.0 / static_cast<double>(n_particles));
  ens.rng_counter.assign(n_particles, 0);
  ens.n_diffuse.assign(n_particles, 0);
  ens.n_specular.assign(n_particles, 0);
  ens.n_grazing.assign(n_particles, 0);
  ens.alive.assign(n_particles, 1);
  ens.death_time.assign(n_particles, -1.0);

  int du = detail::unit_dim(data, domain.dim());
  for (std::size_t i = 0; i < n_particles; ++i) {
    CounterRng rng(seed, init_stream(i));
    double u[6];
    Vec x, v;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      for (int d = 0; d < du; ++d) u[d] = rng.next_double();
      if (detail::map_unit_point(data, domain, u, x, v)) break;
    }
    ens.x[i] = x;
    ens.v[i] = v;
  }
  return ens;
}

void advance(Ensemble& ens, double dt, const Domain& domain, const WallModel& wall,
             const AdvanceOptions& opts) {
  if (dt < 0.0) throw std::invalid_argument("advance: dt must be >= 0");
  if (dt == 0.0) return;
  const double seat = 1e-11 * domain.bounding_radius();
  const int dim = ens.dim;

  run_chunked(ens.size(), opts.workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Vec x = ens.x[i];
      Vec v = ens.v[i];
      if (norm2(v) == 0.0) continue;
      CounterRng rng(ens.seed, evolution_stream(i));
      rng.seek(ens.rng_counter[i]);
      double remaining = dt;
      std::uint64_t events = 0;
      while (remaining > 0.0) {
        double sigma = domain.exit_time(x, v);
        if (sigma >= remaining) {
          x += remaining * v;
          break;
        }
        Vec q = x + sigma * v;
        Vec n = domain.inward_normal(q);
        double vn = dot(v, n);
        if (std::abs(vn) < 1e-8 * norm(v)) ens.n_grazing[i]++;
        if (vn < 0.0) {
          auto out = wall.apply_boundary(q, v, n, dim, rng);
          v = out.v;
          if (out.diffuse) ens.n_diffuse[i]++; else ens.n_specular[i]++;
          if (out.grazing) ens.n_grazing[i]++;
        }
        // tangential contact (vn == 0): keep v, re-seat and carry on
        x = q + seat * n;
        remaining -= sigma;
        if (++events > opts.max_events) {
          std::ostringstream os;
          os << "advance: particle " << i << " exceeded " << opts.max_events
             << " boundary events in one call (speed " << norm(v) << ")";
          throw std::runtime_error(os.str());
        }
      }
      ens.x[i] = x;
      ens.v[i] = v;
      ens.rng_counter[i] = rng.position();
    }
  });
  ens.clock += dt;
}

void absorbing_evolve(Ensemble& ens, double dt, const Domain& domain,
                      const AdvanceOptions& opts) {
  if (dt < 0.0) throw std::invalid_argument("absorbing_evolve: dt must be >= 0");
  if (dt == 0.0) return;
  run_chunked(ens.size(), opts.workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      if (!ens.alive[i]) continue;
      Vec v = ens.v[i];
      if (norm2(v) == 0.0) continue;
      double sigma = domain.exit_time(ens.x[i], v);
      if (sigma <= dt) {
        ens.x[i] = ens.x[i] + sigma * v;
        ens.alive[i] = 0;
        ens.weight[i] = 0.0;
        ens.death_time[i] = ens.clock + sigma;
      } else {
        ens.x[i] += dt * v;
      }
    }
  });
  ens.clock += dt;
}

MassEstimate absorbing_mass(const InitialData& data, double t, const Domain& domain,
                            std::uint64_t n_nodes) {
  if (t < 0.0) throw std::invalid_argument("absorbing_mass: t must be >= 0");
  if (t == 0.0) return {1.0, 0.0};
  return initial_expectation(
      data, domain,
      [&](const Vec& x, const Vec& v) {
        return domain.exit_time(x, v) > t ? 1.0 : 0.0;
      },
      n_nodes);
}

namespace {

struct Writer {
  std::ofstream out;
  std::uint64_t fnv = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      fnv ^= b[i];
      fnv *= 1099511628211ULL;
    }
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <typename T>
  void value(const T& v) { bytes(&v, sizeof(T)); }
  template <typename T>
  void array(const std::vector<T>& v) { bytes(v.data(), v.size() * sizeof(T)); }
};

struct Reader {
  std::ifstream in;
  std::uint64_t fnv = 1469598103934665603ULL;
  void bytes(void* p, std::size_t n) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("checkpoint: truncated record");
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      fnv ^= b[i];
      fnv *= 1099511628211ULL;
    }
  }
  template <typename T>
  void value(T& v) { bytes(&v, sizeof(T)); }
  template <typename T>
  void array(std::vector<T>& v) { bytes(v.data(), v.size() * sizeof(T)); }
};

}  // namespace

void save_checkpoint(const Ensemble& ens, std::uint64_t config_hash,
                     const std::string& config_json, const std::string& path) {
  Writer w;
  w.out.open(path, std::ios::binary);
  if (!w.out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  w.value(kCheckpointMagic);
  w.value(kCheckpointVersion);
  std::uint32_t dim = static_cast<std::uint32_t>(ens.dim);
  w.value(dim);
  std::uint64_t n = ens.size();
  w.value(n);
  w.value(ens.seed);
  w.value(ens.clock);
  w.value(ens.total_mass);
  w.value(config_hash);
  std::uint64_t cfg_len = config_json.size();
  w.value(cfg_len);
  w.bytes(config_json.data(), config_json.size());
  w.array(ens.x);
  w.array(ens.v);
  w.array(ens.weight);
  w.array(ens.rng_counter);
  w.array(ens.n_diffuse);
  w.array(ens.n_specular);
  w.array(ens.n_grazing);
  w.array(ens.alive);
  w.array(ens.death_time);
  std::uint64_t checksum = w.fnv;
  w.out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  if (!w.out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Ensemble load_checkpoint(const std::string& path, std::uint64_t* config_hash_out,
                         std::string* config_json_out) {
  Reader r;
  r.in.open(path, std::ios::binary);
  if (!r.in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::uint64_t magic;
  r.value(magic);
  if (magic != kCheckpointMagic) throw std::runtime_error("checkpoint: bad magic in " + path);
  std::uint32_t version;
  r.value(version);
  if (version != kCheckpointVersion) {
    std::ostringstream os;
    os << "checkpoint: version mismatch (file " << version << ", tool " << kCheckpointVersion
       << ")";
    throw std::runtime_error(os.str());
  }
  Ensemble ens;
  std::uint32_t dim;
  r.value(dim);
  ens.dim = static_cast<int>(dim);
  std::uint64_t n;
  r.value(n);
  r.value(ens.seed);
  r.value(ens.clock);
  r.value(ens.total_mass);
  std::uint64_t config_hash;
  r.value(config_hash);
  std::uint64_t cfg_len;
  r.value(cfg_len);
  std::string config_json(cfg_len, '\0');
  if (cfg_len > 0) r.bytes(config_json.data(), cfg_len);
  ens.x.resize(n);
  ens.v.resize(n);
  ens.weight.resize(n);
  ens.rng_counter.resize(n);
  ens.n_diffuse.resize(n);
  ens.n_specular.resize(n);
  ens.n_grazing.resize(n);
  ens.alive.resize(n);
  ens.death_time.resize(n);
  r.array(ens.x);
  r.array(ens.v);
  r.array(ens.weight);
  r.array(ens.rng_counter);
  r.array(ens.n_diffuse);
  r.array(ens.n_specular);
  r.array(ens.n_grazing);
  r.array(ens.alive);
  r.array(ens.death_time);
  std::uint64_t expect = r.fnv;
  std::uint64_t checksum;
  r.in.read(reinterpret_cast<char*>(&checksum), sizeof(checksum));
  if (!r.in || checksum != expect)
    throw std::runtime_error("checkpoint: checksum mismatch (corrupted record)");
  if (config_hash_out) *config_hash_out = config_hash;
  if (config_json_out) *config_json_out = std::move(config_json);
  return ens;
}

}  // namespace knudsen
