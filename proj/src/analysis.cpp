#include "knudsen/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "knudsen/quadrature.hpp"
#include "knudsen/rng.hpp"

namespace knudsen {

namespace {
constexpr double kPi = std::numbers::pi;

int direction_sector(const Vec& v, int dim, int n_sectors) {
  if (dim == 2) {
    double phi = std::atan2(v.y, v.x);  // [-pi, pi]
    int k = static_cast<int>(std::floor((phi + kPi) / (2.0 * kPi) * n_sectors));
    return std::clamp(k, 0, n_sectors - 1);
  }
  int octant = (v.x > 0.0 ? 1 : 0) + (v.y > 0.0 ? 2 : 0) + (v.z > 0.0 ? 4 : 0);
  if (n_sectors == 8) return octant;
  double ax = std::abs(v.x), ay = std::abs(v.y), az = std::abs(v.z);
  int amax = (ax >= ay && ax >= az) ? 0 : (ay >= az ? 1 : 2);
  return octant * 3 + amax;
}

}  // namespace

// --- binning -----------------------------------------------------------------

Binning Binning::defaults(const Domain& domain, double theta_max) {
  Binning b;
  b.spatial_per_axis = 8;
  b.n_shells = 8;
  b.n_sectors = (domain.dim() == 2) ? 8 : 24;
  b.v_cut = 6.0 * std::sqrt(theta_max);
  return b;
}

Binning Binning::halved() const {
  Binning b = *this;
  b.spatial_per_axis = std::max(2, spatial_per_axis / 2);
  b.n_shells = std::max(2, n_shells / 2);
  b.n_sectors = (n_sectors == 24) ? 8 : std::max(4, n_sectors / 2);
  return b;
}

double Binning::shell_edge(int k) const {
  if (k <= 0) return 0.0;
  if (k >= n_shells) return v_cut;
  return v_cut * std::pow(2.0, static_cast<double>(k - n_shells));
}

std::size_t Binning::n_cells(const Domain& domain) const {
  std::size_t spatial = 1;
  for (int d = 0; d < domain.dim(); ++d) spatial *= spatial_per_axis;
  return spatial * static_cast<std::size_t>(n_shells) * static_cast<std::size_t>(n_sectors);
}

long Binning::cell_index(const Domain& domain, const Vec& x, const Vec& v) const {
  double s = norm(v);
  if (s >= v_cut) return -1;
  int shell;
  if (s <= 0.0) {
    shell = 0;
  } else {
    int j = static_cast<int>(std::floor(std::log2(v_cut / s)));
    shell = std::clamp(n_shells - 1 - j, 0, n_shells - 1);
  }
  double R = domain.bounding_radius();
  auto axis_cell = [&](double c) {
    int k = static_cast<int>(std::floor((c + R) / (2.0 * R) * spatial_per_axis));
    return std::clamp(k, 0, spatial_per_axis - 1);
  };
  long spatial = axis_cell(x.x) * spatial_per_axis + axis_cell(x.y);
  if (domain.dim() == 3) spatial = spatial * spatial_per_axis + axis_cell(x.z);
  int sector = direction_sector(v, domain.dim(), n_sectors);
  return (spatial * n_shells + shell) * n_sectors + sector;
}

BinnedMass bin_ensemble(const Ensemble& ens, const Domain& domain, const Binning& bins) {
  BinnedMass out;
  out.mass.assign(bins.n_cells(domain), 0.0);
  double wsum = 0.0, wsq = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    double w = ens.weight[i];
    if (w <= 0.0) continue;
    wsum += w;
    wsq += w * w;
    long c = bins.cell_index(domain, ens.x[i], ens.v[i]);
    if (c < 0) out.tail += w;
    else out.mass[static_cast<std::size_t>(c)] += w;
  }
  out.total = wsum;
  out.n_effective = (wsq > 0.0) ? wsum * wsum / wsq : 0.0;
  return out;
}

// --- equilibrium model --------------------------------------------------------

EquilibriumModel EquilibriumModel::constant_theta(double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("equilibrium.theta: must be > 0");
  EquilibriumModel m;
  m.empirical_ = false;
  m.theta_ = theta;
  return m;
}

EquilibriumModel EquilibriumModel::empirical(Ensemble snapshot) {
  EquilibriumModel m;
  m.empirical_ = true;
  m.snapshot_ = std::move(snapshot);
  return m;
}

double EquilibriumModel::density(const Domain& domain, const Vec& x, const Vec& v) const {
  if (empirical_) throw std::logic_error("EquilibriumModel: empirical model has no closed form");
  if (!domain.inside_closed(x)) return 0.0;
  int n = domain.dim();
  return std::exp(-norm2(v) / (2.0 * theta_)) /
         (domain.volume() * std::pow(2.0 * kPi * theta_, 0.5 * n));
}

BinnedMass EquilibriumModel::binned(const Domain& domain, const Binning& bins) const {
  if (empirical_) return bin_ensemble(snapshot_, domain, bins);

  const int nd = domain.dim();
  const int nsp = bins.spatial_per_axis;
  const double R = domain.bounding_radius();

  // spatial cell fractions by midpoint counting on a fine subgrid
  std::size_t spatial_cells = 1;
  for (int d = 0; d < nd; ++d) spatial_cells *= nsp;
  std::vector<double> frac(spatial_cells, 0.0);
  std::size_t total_inside = 0;
  int G = (nd == 2) ? 512 : 72;  // global fine grid per axis
  G = (G / nsp) * nsp;           // align to the cell grid
  auto cell_of = [&](int g) { return g * nsp / G; };
  if (nd == 2) {
    for (int gi = 0; gi < G; ++gi) {
      double px = -R + (gi + 0.5) * 2.0 * R / G;
      for (int gj = 0; gj < G; ++gj) {
        double py = -R + (gj + 0.5) * 2.0 * R / G;
        if (domain.inside({px, py, 0.0})) {
          frac[cell_of(gi) * nsp + cell_of(gj)] += 1.0;
          ++total_inside;
        }
      }
    }
  } else {
    for (int gi = 0; gi < G; ++gi) {
      double px = -R + (gi + 0.5) * 2.0 * R / G;
      for (int gj = 0; gj < G; ++gj) {
        double py = -R + (gj + 0.5) * 2.0 * R / G;
        for (int gk = 0; gk < G; ++gk) {
          double pz = -R + (gk + 0.5) * 2.0 * R / G;
          if (domain.inside({px, py, pz})) {
            frac[(cell_of(gi) * nsp + cell_of(gj)) * nsp + cell_of(gk)] += 1.0;
            ++total_inside;
          }
        }
      }
    }
  }
  for (double& f : frac) f /= static_cast<double>(total_inside);

  // speed-shell masses by quadrature of the radial Maxwell density
  auto rho = [&](double s) {
    return std::pow(s, nd - 1) * std::exp(-s * s / (2.0 * theta_));
  };
  double s_hi = std::max(bins.v_cut, 14.0 * std::sqrt(theta_));
  double total = integrate(rho, 0.0, s_hi, 1e-14);
  std::vector<double> shell(bins.n_shells, 0.0);
  for (int k = 0; k < bins.n_shells; ++k)
    shell[k] = integrate(rho, bins.shell_edge(k), bins.shell_edge(k + 1), 1e-14) / total;
  double shell_sum = 0.0;
  for (double sm : shell) shell_sum += sm;
  double tail = std::max(0.0, 1.0 - shell_sum);

  BinnedMass out;
  out.mass.assign(bins.n_cells(domain), 0.0);
  out.tail = tail;
  out.total = 1.0;
  out.n_effective = std::numeric_limits<double>::infinity();
  double sector_mass = 1.0 / bins.n_sectors;
  for (std::size_t sp = 0; sp < spatial_cells; ++sp) {
    for (int k = 0; k < bins.n_shells; ++k) {
      double base = frac[sp] * shell[k] * sector_mass;
      for (int sec = 0; sec < bins.n_sectors; ++sec) {
        out.mass[(sp * bins.n_shells + k) * bins.n_sectors + sec] = base;
      }
    }
  }
  return out;
}

// --- L1 distance --------------------------------------------------------------

namespace {

L1Record l1_core(const BinnedMass& a, const BinnedMass& b) {
  L1Record rec;
  rec.n_cells = a.mass.size();
  std::vector<double> diffs(a.mass.size() + 1, 0.0);
  std::vector<double> errs(a.mass.size() + 1, 0.0);
  double inv_na = std::isfinite(a.n_effective) && a.n_effective > 0.0 ? 1.0 / a.n_effective : 0.0;
  double inv_nb = std::isfinite(b.n_effective) && b.n_effective > 0.0 ? 1.0 / b.n_effective : 0.0;
  for (std::size_t c = 0; c <= a.mass.size(); ++c) {
    double ma = (c < a.mass.size()) ? a.mass[c] : a.tail;
    double mb = (c < b.mass.size()) ? b.mass[c] : b.tail;
    diffs[c] = std::abs(ma - mb);
    double p = std::min(1.0, std::max(ma / std::max(a.total, 1e-300),
                                      mb / std::max(b.total, 1e-300)));
    double var = p * (1.0 - p) * (inv_na + inv_nb);
    errs[c] = std::sqrt(2.0 * var / kPi);
  }
  rec.distance = pairwise_sum(diffs);
  rec.err_sampling = pairwise_sum(errs);
  return rec;
}

}  // namespace

L1Record l1_distance(const Ensemble& ens, const EquilibriumModel& eq, const Domain& domain,
                     const Binning& bins) {
  if (ens.size() == 0) throw std::invalid_argument("l1_distance: empty ensemble");
  if (!eq.is_empirical() && bins.v_cut < 4.0 * std::sqrt(eq.theta()))
    throw std::invalid_argument("binning.v_cut: must be at least 4 sqrt(theta)");
  BinnedMass a = bin_ensemble(ens, domain, bins);
  BinnedMass b = eq.binned(domain, bins);
  L1Record rec = l1_core(a, b);
  Binning half = bins.halved();
  L1Record rec_half = l1_core(bin_ensemble(ens, domain, half), eq.binned(domain, half));
  rec.bias_proxy = std::abs(rec.distance - rec_half.distance);
  rec.over_resolved = rec.n_cells * 10 > static_cast<std::size_t>(a.n_effective);
  return rec;
}

L1Record l1_between(const Ensemble& ea, const Ensemble& eb, const Domain& domain,
                    const Binning& bins) {
  if (ea.size() == 0 || eb.size() == 0) throw std::invalid_argument("l1_between: empty ensemble");
  L1Record rec = l1_core(bin_ensemble(ea, domain, bins), bin_ensemble(eb, domain, bins));
  Binning half = bins.halved();
  L1Record rec_half =
      l1_core(bin_ensemble(ea, domain, half), bin_ensemble(eb, domain, half));
  rec.bias_proxy = std::abs(rec.distance - rec_half.distance);
  return rec;
}

// --- decay fit ----------------------------------------------------------------

FitResult fit_decay(const std::vector<CurvePoint>& curve, double window_lo, double window_hi,
                    const FitModel& model) {
  FitResult out;
  out.log_correction = model.log_correction;
  out.log_power = model.log_power;

  std::vector<double> ts, ys, ws;
  int in_window = 0;
  for (const CurvePoint& p : curve) {
    if (p.t < window_lo || p.t > window_hi) continue;
    ++in_window;
    if (!(p.l1 > 3.0 * p.l1_err) || p.l1 <= 0.0) continue;  // noise floor
    double lt = std::log1p(p.t);
    if (model.log_correction && lt <= 0.0) continue;
    double y = std::log(p.l1);
    if (model.log_correction) y -= model.log_power * std::log(lt);
    ts.push_back(p.t);
    ys.push_back(y);
    double rel = (p.l1_err > 0.0) ? p.l1_err / p.l1 : 1e-8;
    ws.push_back(1.0 / (rel * rel));
  }
  out.n_points = static_cast<int>(ts.size());
  out.shrunk = out.n_points < in_window;
  if (out.n_points < 5) {
    out.refused = true;
    out.note = "fit refused: fewer than 5 points above the noise floor in the window";
    return out;
  }
  out.window_lo = ts.front();
  out.window_hi = ts.back();
  if (out.shrunk) {
    std::ostringstream os;
    os << "window shrunk to [" << out.window_lo << ", " << out.window_hi
       << "]: " << (in_window - out.n_points) << " points at the noise floor dropped";
    out.note = os.str();
  }

  auto fit_once = [&](const std::vector<double>& y) {
    std::vector<std::vector<double>> X(ts.size());
    for (std::size_t r = 0; r < ts.size(); ++r) X[r] = {1.0, std::log1p(ts[r])};
    return wls(X, y, ws);
  };
  WlsFit base = fit_once(ys);
  out.exponent = base.coeff[1];

  // residual bootstrap, 199 resamples
  CounterRng rng(0xB007B007ULL, 0);
  std::vector<double> boots;
  boots.reserve(199);
  std::size_t n = ts.size();
  for (int b = 0; b < 199; ++b) {
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t pick = static_cast<std::size_t>(rng.next_u64() % n);
      y[r] = base.fitted[r] + base.residual[pick];
    }
    boots.push_back(fit_once(y).coeff[1]);
  }
  std::sort(boots.begin(), boots.end());
  out.ci_lo = std::min(out.exponent, boots[4]);    // ~2.5 percentile of 199
  out.ci_hi = std::max(out.exponent, boots[194]);  // ~97.5 percentile
  return out;
}

// --- Lyapunov audit -------------------------------------------------------------

LyapunovAuditResult lyapunov_audit(const InitialData& initial, double T, int lyapunov_case,
                                   double i, double eps, std::size_t n_particles,
                                   std::uint64_t seed, const Domain& domain,
                                   const WallModel& wall, int n_checkpoints, int workers) {
  LyapunovAuditResult out;
  out.seed = seed;
  out.constants = lyapunov_constants(lyapunov_case, i, eps, domain, wall);
  if (n_checkpoints < 33) n_checkpoints = 33;

  Ensemble ens = sample_initial(initial, domain, n_particles, seed);
  double c4 = wall.c4();
  NormEstimate m1_0 = weighted_norm(ens, out.constants.m1, domain, c4);
  NormEstimate m0_prev = weighted_norm(ens, out.constants.m0, domain, c4);
  double mass = ens.mass();

  double integral = 0.0;
  double integral_var = 0.0;
  std::size_t sentinels = m1_0.n_infinite;
  AdvanceOptions opts;
  opts.workers = workers;
  if (T > 0.0) {
    double dt = T / (n_checkpoints - 1);
    for (int k = 1; k < n_checkpoints; ++k) {
      advance(ens, dt, domain, wall, opts);
      NormEstimate m0_k = weighted_norm(ens, out.constants.m0, domain, c4);
      integral += 0.5 * dt * (m0_prev.value + m0_k.value);
      integral_var += 0.25 * dt * dt *
                      (m0_prev.std_error * m0_prev.std_error + m0_k.std_error * m0_k.std_error);
      sentinels = std::max(sentinels, m0_k.n_infinite);
      m0_prev = m0_k;
    }
  }
  NormEstimate m1_T = weighted_norm(ens, out.constants.m1, domain, c4);
  sentinels = std::max(sentinels, m1_T.n_infinite);
  out.sentinel_fraction = static_cast<double>(sentinels) / static_cast<double>(n_particles);
  if (out.sentinel_fraction > 1e-3) {
    out.aborted = true;
    out.verdict = "ABORTED";
    return out;
  }

  out.norm_m1_initial = m1_0.value;
  out.norm_m1_final = m1_T.value;
  out.integral_m0 = integral;
  out.lhs = m1_T.value + out.constants.C * integral;
  out.rhs = m1_0.value + out.constants.b * (1.0 + T) * mass;
  out.margin = out.rhs - out.lhs;
  out.se_combined = std::sqrt(m1_T.std_error * m1_T.std_error +
                              m1_0.std_error * m1_0.std_error +
                              out.constants.C * out.constants.C * integral_var);
  out.verdict = (out.lhs <= out.rhs + 3.0 * out.se_combined) ? "PASS" : "FAIL";
  return out;
}

// --- Doeblin probe --------------------------------------------------------------

DoeblinResult doeblin_probe(const DoeblinOptions& opt, const Domain& domain,
                            const WallModel& wall) {
  DoeblinResult out;
  out.seed = opt.seed;
  const int nd = domain.dim();
  const double R = opt.R;
  const double Rb = domain.bounding_radius();
  const double s_max = domain.diameter() / R;  // proxy speeds never exceed this
  const int nsp = opt.grid_spatial, nsh = opt.grid_shells, nsec = opt.grid_sectors;

  std::size_t spatial_cells = 1;
  for (int d = 0; d < nd; ++d) spatial_cells *= nsp;
  const std::size_t n_cells = spatial_cells * nsh * nsec;

  auto shell_lo = [&](int k) { return s_max * k / nsh; };
  auto cell_of = [&](const Vec& x, const Vec& v) -> long {
    double s = norm(v);
    int shell = std::clamp(static_cast<int>(s / s_max * nsh), 0, nsh - 1);
    auto axis_cell = [&](double c) {
      return std::clamp(static_cast<int>(std::floor((c + Rb) / (2.0 * Rb) * nsp)), 0, nsp - 1);
    };
    long spatial = axis_cell(x.x) * nsp + axis_cell(x.y);
    if (nd == 3) spatial = spatial * nsp + axis_cell(x.z);
    int sector = direction_sector(v, nd, nsec);
    return (spatial * nsh + shell) * nsec + sector;
  };

  // proxy volume fraction per cell by uniform sampling of the cell
  std::vector<double> proxy_vol(n_cells, 0.0);
  std::vector<char> is_probe(n_cells, 0);
  const double spatial_vol = std::pow(2.0 * Rb / nsp, nd);
  {
    CounterRng vol_rng(opt.seed, 0xD0EBF001ULL);
    for (std::size_t c = 0; c < n_cells; ++c) {
      std::size_t sec = c % nsec;
      std::size_t shell = (c / nsec) % nsh;
      std::size_t spatial = c / (nsec * nsh);
      int hits = 0;
      double e1 = shell_lo(static_cast<int>(shell)), e2 = shell_lo(static_cast<int>(shell) + 1);
      for (int m = 0; m < opt.proxy_volume_samples; ++m) {
        // uniform point of the spatial box
        Vec x;
        std::size_t sp = spatial;
        double cz = 0.0, cy, cx;
        if (nd == 3) {
          cz = static_cast<double>(sp % nsp);
          sp /= nsp;
        }
        cy = static_cast<double>(sp % nsp);
        cx = static_cast<double>(sp / nsp);
        x.x = -Rb + (cx + vol_rng.next_double()) * 2.0 * Rb / nsp;
        x.y = -Rb + (cy + vol_rng.next_double()) * 2.0 * Rb / nsp;
        if (nd == 3) x.z = -Rb + (cz + vol_rng.next_double()) * 2.0 * Rb / nsp;
        // uniform point of the velocity cell (area measure in speed)
        double u = vol_rng.next_double();
        double s = (nd == 2) ? std::sqrt(e1 * e1 + u * (e2 * e2 - e1 * e1))
                             : std::cbrt(e1 * e1 * e1 + u * (e2 * e2 * e2 - e1 * e1 * e1));
        Vec v;
        if (nd == 2) {
          double phi = 2.0 * kPi * (sec + vol_rng.next_double()) / nsec;
          v = {s * std::cos(phi), s * std::sin(phi), 0.0};
        } else {
          // sample directions uniformly until the sector matches
          double ct = 2.0 * vol_rng.next_double() - 1.0;
          double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
          double phi = 2.0 * kPi * vol_rng.next_double();
          v = {s * st * std::cos(phi), s * st * std::sin(phi), s * ct};
          if (direction_sector(v, 3, nsec) != static_cast<int>(sec)) { --m; continue; }
        }
        if (!domain.inside(x)) continue;
        double back = domain.exit_time(x, -1.0 * v);
        if (back >= R && back <= 2.0 * R) ++hits;
      }
      double frac = static_cast<double>(hits) / opt.proxy_volume_samples;
      double vel_vol;
      if (nd == 2) vel_vol = kPi * (e2 * e2 - e1 * e1) / nsec;
      else vel_vol = 4.0 / 3.0 * kPi * (e2 * e2 * e2 - e1 * e1 * e1) / nsec;
      proxy_vol[c] = frac * spatial_vol * vel_vol;
      is_probe[c] = frac >= opt.proxy_fraction_min ? 1 : 0;
    }
  }
  std::vector<std::size_t> probe_cells;
  for (std::size_t c = 0; c < n_cells; ++c)
    if (is_probe[c]) probe_cells.push_back(c);
  out.n_probe_cells = probe_cells.size();
  for (std::size_t c : probe_cells) out.probe_volume += proxy_vol[c];
  if (probe_cells.empty()) {
    out.verdict = "INCONCLUSIVE";
    out.note = "support proxy has no grid cells above the volume-fraction threshold";
    return out;
  }
  std::vector<std::size_t> slot(n_cells, static_cast<std::size_t>(-1));
  for (std::size_t s = 0; s < probe_cells.size(); ++s) slot[probe_cells[s]] = s;

  // point-mass-like initial cells inside B_R = { sigma(y, w) <= R }
  const double T = opt.kappa * R;
  std::vector<std::vector<double>> cell_mass(
      opt.n_initial_cells, std::vector<double>(probe_cells.size(), 0.0));
  for (int j = 0; j < opt.n_initial_cells; ++j) {
    CounterRng cell_rng(opt.seed, 0xD0EB0000ULL + static_cast<std::uint64_t>(j));
    Vec y;
    do {
      y = {(2.0 * cell_rng.next_double() - 1.0) * Rb,
           (2.0 * cell_rng.next_double() - 1.0) * Rb, 0.0};
      if (nd == 3) y.z = (2.0 * cell_rng.next_double() - 1.0) * Rb;
    } while (!domain.inside(y));
    Vec dir;
    if (nd == 2) {
      double phi = 2.0 * kPi * cell_rng.next_double();
      dir = {std::cos(phi), std::sin(phi), 0.0};
    } else {
      double ct = 2.0 * cell_rng.next_double() - 1.0;
      double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      double phi = 2.0 * kPi * cell_rng.next_double();
      dir = {st * std::cos(phi), st * std::sin(phi), ct};
    }
    double chord = domain.exit_time(y, dir);
    double speed = chord / R * (1.0 + cell_rng.next_double());  // sigma <= R
    Vec w = speed * dir;

    Ensemble ens;
    ens.dim = nd;
    ens.seed = CounterRng::mix(opt.seed ^ (0xC0FFEEULL + static_cast<std::uint64_t>(j)));
    std::size_t N = opt.n_particles;
    ens.x.resize(N);
    ens.v.resize(N);
    ens.weight.assign(N, 1.0 / static_cast<double>(N));
    ens.rng_counter.assign(N, 0);
    ens.n_diffuse.assign(N, 0);
    ens.n_specular.assign(N, 0);
    ens.n_grazing.assign(N, 0);
    ens.alive.assign(N, 1);
    ens.death_time.assign(N, -1.0);
    for (std::size_t p = 0; p < N; ++p) {
      CounterRng rng(ens.seed, init_stream(p));
      Vec xp, vp;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        xp = y + opt.cell_jitter * Vec{rng.next_gaussian(), rng.next_gaussian(),
                                       nd == 3 ? rng.next_gaussian() : 0.0};
        vp = w + (opt.cell_jitter * speed) * Vec{rng.next_gaussian(), rng.next_gaussian(),
                                                 nd == 3 ? rng.next_gaussian() : 0.0};
        if (domain.inside(xp) && domain.exit_time(xp, vp) <= R) break;
      }
      ens.x[p] = xp;
      ens.v[p] = vp;
    }
    AdvanceOptions opts;
    opts.workers = opt.workers;
    advance(ens, T, domain, wall, opts);
    for (std::size_t p = 0; p < N; ++p) {
      double back = domain.exit_time(ens.x[p], -1.0 * ens.v[p]);
      if (back < R || back > 2.0 * R) continue;
      long c = cell_of(ens.x[p], ens.v[p]);
      if (c >= 0 && slot[static_cast<std::size_t>(c)] != static_cast<std::size_t>(-1))
        cell_mass[j][slot[static_cast<std::size_t>(c)]] += ens.weight[p];
    }
  }

  out.min_density = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < probe_cells.size(); ++s) {
    double col_total = 0.0;
    for (int j = 0; j < opt.n_initial_cells; ++j) {
      double density = cell_mass[j][s] / proxy_vol[probe_cells[s]];
      out.min_density = std::min(out.min_density, density);
      col_total += cell_mass[j][s];
      if (cell_mass[j][s] <= 0.0) ++out.n_empty_some;
    }
    if (col_total <= 0.0) ++out.n_empty_all;
  }
  out.empirical_constant = (out.min_density > 0.0) ? out.min_density * out.probe_volume : 0.0;

  if (out.min_density > opt.tau_min) {
    out.verdict = "PASS";
  } else if (out.n_empty_all > 0) {
    out.verdict = "INCONCLUSIVE";
    std::ostringstream os;
    os << out.n_empty_all << " probe cells received no particles from any initial cell; "
       << "raise n_particles (currently " << opt.n_particles << ")";
    out.note = os.str();
  } else {
    out.verdict = "FAIL";
    std::ostringstream os;
    os << out.n_empty_some << " (initial cell, probe cell) pairs have zero density";
    out.note = os.str();
  }
  return out;
}

// --- unit-disk h_P --------------------------------------------------------------

HpResult hp_positivity_check(const Domain& disk, const WallModel& wall, double R, int n_pairs,
                             std::uint64_t seed, int nodes_per_arc) {
  if (disk.kind() != DomainKind::Disk || std::abs(disk.params()[0] - 1.0) > 1e-12)
    throw std::invalid_argument("hp_positivity_check: requires the unit disk");
  HpResult out;
  out.n_pairs = n_pairs;
  out.min_hp = std::numeric_limits<double>::infinity();
  out.min_measure = std::numeric_limits<double>::infinity();
  out.min_chord = std::numeric_limits<double>::infinity();
  out.chords_ok = true;

  const double chord_lo = std::sqrt(2.0 - std::sqrt(2.0));
  std::vector<Vec> theta_pts;
  for (const Vec& x : disk.boundary_samples(64)) theta_pts.push_back(x);
  auto m_lower = [&](double dist) {
    // min over tau in [R, 2R] and the boundary of M(x, dist / tau); M decreases
    // in speed so the minimum sits at tau = R
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& x : theta_pts) best = std::min(best, wall.maxwellian_speed(x, dist / R, 2));
    return best;
  };

  CounterRng rng(seed, 0x48500000ULL);
  for (int pair = 0; pair < n_pairs; ++pair) {
    double pa = 2.0 * kPi * rng.next_double();
    double pb = 2.0 * kPi * rng.next_double();
    Vec a{std::cos(pa), std::sin(pa), 0.0};
    Vec b{std::cos(pb), std::sin(pb), 0.0};

    // H = circle minus the two caps of angular half-width pi/4 around a and b
    auto wrap = [](double x) {
      while (x < 0.0) x += 2.0 * kPi;
      while (x >= 2.0 * kPi) x -= 2.0 * kPi;
      return x;
    };
    struct Arc { double lo, hi; };
    std::vector<Arc> excluded;
    for (double center : {pa, pb}) {
      double lo = wrap(center - kPi / 4.0), hi = wrap(center + kPi / 4.0);
      if (lo <= hi) excluded.push_back({lo, hi});
      else {
        excluded.push_back({lo, 2.0 * kPi});
        excluded.push_back({0.0, hi});
      }
    }
    std::sort(excluded.begin(), excluded.end(), [](const Arc& u, const Arc& v) { return u.lo < v.lo; });
    std::vector<Arc> merged;
    for (const Arc& e : excluded) {
      if (!merged.empty() && e.lo <= merged.back().hi) {
        merged.back().hi = std::max(merged.back().hi, e.hi);
      } else {
        merged.push_back(e);
      }
    }
    std::vector<Arc> kept;
    double cursor = 0.0;
    for (const Arc& e : merged) {
      if (e.lo > cursor) kept.push_back({cursor, e.lo});
      cursor = std::max(cursor, e.hi);
    }
    if (cursor < 2.0 * kPi) kept.push_back({cursor, 2.0 * kPi});

    double measure = 0.0;
    for (const Arc& k : kept) measure += k.hi - k.lo;
    out.min_measure = std::min(out.min_measure, measure);

    auto integrand = [&](double phi) {
      Vec y{std::cos(phi), std::sin(phi), 0.0};
      double ta = 1.0 - dot(y, a);  // |(y - a) . n_a| = |(a - y) . n_y| on the unit circle
      double tb = 1.0 - dot(y, b);
      double da = norm(y - a), db = norm(y - b);
      return m_lower(da) * ta * ta * m_lower(db) * tb * tb;
    };
    double hp = 0.0;
    for (const Arc& k : kept) {
      hp += integrate(integrand, k.lo, k.hi, 1e-12);
      // chord bounds hold at every node of the quadrature arcs
      for (int m = 0; m <= nodes_per_arc; ++m) {
        double phi = k.lo + (k.hi - k.lo) * m / nodes_per_arc;
        Vec y{std::cos(phi), std::sin(phi), 0.0};
        double da = norm(y - a), db = norm(y - b);
        out.min_chord = std::min({out.min_chord, da, db});
        out.max_chord = std::max({out.max_chord, da, db});
        if (da < chord_lo - 1e-9 || db < chord_lo - 1e-9 || da > disk.diameter() + 1e-9 ||
            db > disk.diameter() + 1e-9)
          out.chords_ok = false;
      }
    }
    out.min_hp = std::min(out.min_hp, hp);
    out.max_hp = std::max(out.max_hp, hp);
  }
  out.verdict =
      (out.min_hp > 0.0 && out.chords_ok && out.min_measure >= 0.5) ? "PASS" : "FAIL";
  return out;
}

// --- stationarity -----------------------------------------------------------------

StationarityResult stationarity_test(const InitialData& candidate, double burn_in,
                                     double horizon, std::size_t n_particles,
                                     std::uint64_t seed, const Domain& domain,
                                     const WallModel& wall, double alpha, int workers) {
  StationarityResult out;
  out.seed = seed;
  Ensemble ens = sample_initial(candidate, domain, n_particles, seed);
  AdvanceOptions opts;
  opts.workers = workers;
  if (burn_in > 0.0) advance(ens, burn_in, domain, wall, opts);

  const int nd = domain.dim();
  const int n_spatial = (nd == 2) ? 16 : 8;
  const int n_dir = (nd == 2) ? 8 : 24;
  auto snapshot = [&](std::vector<double>& speeds, std::vector<double>& spatial,
                      std::vector<double>& dir) {
    speeds.clear();
    speeds.reserve(ens.size());
    spatial.assign(n_spatial, 0.0);
    dir.assign(n_dir, 0.0);
    for (std::size_t i = 0; i < ens.size(); ++i) {
      speeds.push_back(norm(ens.v[i]));
      int sp;
      if (nd == 2) {
        double phi = std::atan2(ens.x[i].y, ens.x[i].x);
        sp = std::clamp(static_cast<int>(std::floor((phi + kPi) / (2.0 * kPi) * n_spatial)), 0,
                        n_spatial - 1);
      } else {
        sp = (ens.x[i].x > 0.0 ? 1 : 0) + (ens.x[i].y > 0.0 ? 2 : 0) + (ens.x[i].z > 0.0 ? 4 : 0);
      }
      spatial[sp] += 1.0;
      dir[direction_sector(ens.v[i], nd, n_dir)] += 1.0;
    }
  };

  std::vector<double> speeds_a, spatial_a, dir_a;
  snapshot(speeds_a, spatial_a, dir_a);
  advance(ens, horizon, domain, wall, opts);
  std::vector<double> speeds_b, spatial_b, dir_b;
  snapshot(speeds_b, spatial_b, dir_b);

  double ks = ks_two_sample_statistic(speeds_a, speeds_b);
  double ks_crit = ks_two_sample_critical(speeds_a.size(), speeds_b.size(), alpha);
  out.tests.push_back({"speed_ks", ks, ks_crit, ks < ks_crit});

  int dof = 0;
  double chi_sp = chi2_two_sample(spatial_a, spatial_b, &dof);
  double crit_sp = chi2_quantile(dof, 1.0 - alpha);
  out.tests.push_back({"spatial_sector_chi2", chi_sp, crit_sp, chi_sp < crit_sp});

  double chi_dir = chi2_two_sample(dir_a, dir_b, &dof);
  double crit_dir = chi2_quantile(dof, 1.0 - alpha);
  out.tests.push_back({"direction_sector_chi2", chi_dir, crit_dir, chi_dir < crit_dir});

  out.pass = true;
  for (const auto& t : out.tests) out.pass = out.pass && t.pass;
  return out;
}

// --- absorbing bounds ---------------------------------------------------------------

AbsorbingBoundResult absorbing_bound_check(const InitialData& initial, const WeightSpec& weight,
                                           const std::vector<double>& times,
                                           const Domain& domain, std::uint64_t n_nodes) {
  if (weight.kind == WeightSpec::Kind::ExpSigma) {
    bool bounded_below =
        (initial.kind == InitialData::Kind::UniformAnnulusSpeed && initial.vmin > 0.0) ||
        (initial.kind == InitialData::Kind::ProductGrid && !initial.speed_edges.empty() &&
         initial.speed_edges.front() > 0.0);
    if (!bounded_below)
      throw std::invalid_argument(
          "absorbing_bound_check: |f0|_{exp_sigma} is infinite for initial data whose speeds "
          "are not bounded away from zero");
  }
  if (weight.kind == WeightSpec::Kind::RPoly && !(weight.nu > 1.0))
    throw std::invalid_argument("absorbing_bound_check: r_nu requires nu > 1");
  if (weight.kind != WeightSpec::Kind::ExpSigma && weight.kind != WeightSpec::Kind::RPoly)
    throw std::invalid_argument("absorbing_bound_check: weight must be exp_sigma or r_nu");

  AbsorbingBoundResult out;
  out.weight_key = weight.key();
  MassEstimate nrm = initial_expectation(
      initial, domain,
      [&](const Vec& x, const Vec& v) { return evaluate(weight, domain, 0.5, x, v); }, n_nodes);
  out.norm_value = nrm.value;
  out.norm_err = nrm.error;

  out.pass = true;
  for (double t : times) {
    MassEstimate mass = absorbing_mass(initial, t, domain, n_nodes);
    double theta_t = (weight.kind == WeightSpec::Kind::ExpSigma)
                         ? std::exp(-t)
                         : std::pow(1.0 + t, -weight.nu);
    double bound = theta_t * nrm.value;
    double slack = mass.error + theta_t * nrm.error;
    bool ok = mass.value <= bound + slack;
    out.points.push_back({t, mass.value, mass.error, bound, ok});
    out.pass = out.pass && ok;
  }
  return out;
}

DecayShape classify_mass_decay(const std::vector<double>& times,
                               const std::vector<double>& masses) {
  if (times.size() < 3 || times.size() != masses.size())
    throw std::invalid_argument("classify_mass_decay: need at least 3 points");
  DecayShape out;
  std::size_t k = times.size() - 1;
  out.last_mass = masses[k];
  double rate = std::log(masses[0] / masses[1]) / (times[1] - times[0]);
  out.exp_extrapolation = masses[1] * std::exp(-rate * (times[k] - times[1]));
  out.poly_exponent = std::log(masses[k] / masses[k - 1]) /
                      std::log((1.0 + times[k]) / (1.0 + times[k - 1]));
  out.polynomial = out.last_mass > 10.0 * out.exp_extrapolation;
  return out;
}

}  // namespace knudsen
