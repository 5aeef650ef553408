#include "knudsen/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "knudsen/analysis.hpp"
#include "knudsen/quadrature.hpp"

namespace knudsen {

namespace fs = std::filesystem;

namespace {

json norm_to_json(const NormEstimate& n) {
  return {{"value", n.value},
          {"std_error", n.std_error},
          {"n_infinite", n.n_infinite},
          {"tail_index", std::isfinite(n.tail_index) ? json(n.tail_index) : json()},
          {"mean_tail_ok", n.mean_tail_ok},
          {"variance_tail_ok", n.variance_tail_ok}};
}

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json run_verification(const VerificationSpec& spec, const ExperimentConfig& cfg,
                      const WallModel& wall, int workers) {
  const json& p = spec.params;
  auto num = [&](const char* key, double fallback) {
    return (p.is_object() && p.contains(key)) ? p[key].get<double>() : fallback;
  };
  json v{{"name", spec.name}, {"seed", cfg.seed}};
  if (spec.name == "lyapunov") {
    auto res = lyapunov_audit(cfg.initial, num("T", 10.0),
                              static_cast<int>(num("case", 1.0)), num("i", 3.0),
                              num("eps", 0.6), cfg.n_particles, cfg.seed, cfg.domain, wall,
                              static_cast<int>(num("checkpoints", 33.0)), workers);
    v["verdict"] = res.verdict;
    v["lhs"] = res.lhs;
    v["rhs"] = res.rhs;
    v["margin"] = res.margin;
    v["se"] = res.se_combined;
    v["C"] = res.constants.C;
    v["b"] = res.constants.b;
  } else if (spec.name == "doeblin") {
    DoeblinOptions opt;
    opt.R = num("R", 3.0);
    opt.kappa = num("kappa", 6.0);
    opt.n_initial_cells = static_cast<int>(num("initial_cells", 10.0));
    opt.n_particles = static_cast<std::size_t>(num("n_particles", 100000.0));
    opt.seed = cfg.seed;
    opt.workers = workers;
    auto res = doeblin_probe(opt, cfg.domain, wall);
    v["verdict"] = res.verdict;
    v["min_density"] = res.min_density;
    v["empirical_constant"] = res.empirical_constant;
    v["probe_cells"] = res.n_probe_cells;
    v["note"] = res.note;
  } else if (spec.name == "stationarity") {
    auto res = stationarity_test(cfg.initial, num("burn_in", 0.0), num("horizon", 20.0),
                                 cfg.n_particles, cfg.seed, cfg.domain, wall,
                                 num("alpha", 0.01), workers);
    v["verdict"] = res.pass ? "PASS" : "FAIL";
    json tests = json::array();
    for (const auto& t : res.tests)
      tests.push_back({{"name", t.name},
                       {"statistic", t.statistic},
                       {"critical", t.critical},
                       {"pass", t.pass}});
    v["tests"] = tests;
  } else if (spec.name == "absorbing") {
    WeightSpec w = p.is_object() && p.value("weight", std::string("exp_sigma")) == "exp_sigma"
                       ? WeightSpec::exp_sigma()
                       : WeightSpec::r_poly(num("nu", 2.0));
    std::vector<double> times{0.5, 1.0, 2.0, 4.0};
    if (p.is_object() && p.contains("times")) times = p["times"].get<std::vector<double>>();
    auto res = absorbing_bound_check(cfg.initial, w, times, cfg.domain,
                                     static_cast<std::uint64_t>(num("nodes", 1 << 18)));
    v["verdict"] = res.pass ? "PASS" : "FAIL";
    v["norm"] = res.norm_value;
    v["norm_err"] = res.norm_err;
    json pts = json::array();
    for (const auto& pt : res.points)
      pts.push_back({{"t", pt.t}, {"mass", pt.mass}, {"bound", pt.bound}, {"pass", pt.pass}});
    v["points"] = pts;
  } else if (spec.name == "hp") {
    auto res = hp_positivity_check(cfg.domain, wall, num("R", 3.0),
                                   static_cast<int>(num("pairs", 100.0)), cfg.seed);
    v["verdict"] = res.verdict;
    v["min_hp"] = res.min_hp;
    v["min_measure"] = res.min_measure;
    v["min_chord"] = res.min_chord;
  }
  return v;
}

}  // namespace

RunOutcome run_experiment(ExperimentConfig cfg, const RunOverrides& overrides) {
  if (overrides.seed) {
    cfg.seed = *overrides.seed;
    cfg.echo["run"]["seed"] = cfg.seed;
  }
  if (overrides.n_particles) {
    cfg.n_particles = *overrides.n_particles;
    cfg.echo["run"]["n_particles"] = cfg.n_particles;
  }
  if (overrides.workers) {
    cfg.workers = *overrides.workers;
    cfg.echo["run"]["workers"] = cfg.workers;
  }
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;

  auto t_start = std::chrono::steady_clock::now();
  WallModel wall(cfg.domain, cfg.theta, cfg.alpha, cfg.c0);

  Ensemble ens = sample_initial(cfg.initial, cfg.domain, cfg.n_particles, cfg.seed);

  const int n = cfg.domain.dim();
  NormEstimate initial_mn = weighted_norm(ens, WeightSpec::m(n), cfg.domain, wall.c4());
  NormEstimate initial_omega =
      weighted_norm(ens, WeightSpec::omega(n + 1), cfg.domain, wall.c4());

  bool has_closed_equilibrium = cfg.theta.kind == BoundaryField::Kind::Constant;
  EquilibriumModel eq = has_closed_equilibrium
                            ? EquilibriumModel::constant_theta(cfg.theta.params[0])
                            : EquilibriumModel::constant_theta(1.0);

  AdvanceOptions opts;
  opts.workers = cfg.workers;

  std::vector<CurvePoint> curve;
  auto record_point = [&](double t) {
    CurvePoint pt;
    pt.t = t;
    pt.mass = ens.mass();
    if (has_closed_equilibrium) {
      L1Record rec = l1_distance(ens, eq, cfg.domain, cfg.binning);
      pt.l1 = rec.distance;
      pt.l1_err = rec.err_sampling;
      pt.l1_bias = rec.bias_proxy;
    } else {
      pt.l1 = std::nan("");
      pt.l1_err = std::nan("");
      pt.l1_bias = std::nan("");
    }
    for (const WeightSpec& w : cfg.observables)
      pt.norms[w.key()] = weighted_norm(ens, w, cfg.domain, wall.c4());
    curve.push_back(std::move(pt));
  };

  record_point(0.0);
  for (double t : cfg.checkpoint_times) {
    advance(ens, t - ens.clock, cfg.domain, wall, opts);
    record_point(t);
  }

  fs::create_directories(cfg.output_dir);
  std::string ckpt_path;
  std::uint64_t chash = config_hash(cfg);
  if (cfg.write_checkpoints) {
    ckpt_path = (fs::path(cfg.output_dir) / "final.ckpt").string();
    save_checkpoint(ens, chash, cfg.echo.dump(), ckpt_path);
  }

  // CSV emission: t, mass, l1_distance, l1_err, then one column per norm
  std::string csv_path = (fs::path(cfg.output_dir) / "curve.csv").string();
  {
    std::ofstream csv(csv_path);
    csv << "t,mass,l1_distance,l1_err";
    for (const WeightSpec& w : cfg.observables) csv << ",norm_" << w.key();
    csv << "\n";
    for (const CurvePoint& pt : curve) {
      csv << format_g(pt.t) << "," << format_g(pt.mass) << "," << format_g(pt.l1) << ","
          << format_g(pt.l1_err);
      for (const WeightSpec& w : cfg.observables)
        csv << "," << format_g(pt.norms.at(w.key()).value);
      csv << "\n";
    }
  }

  json report;
  report["version"] = kToolVersion;
  report["config"] = cfg.echo;
  report["config_hash"] = hash_hex(chash);
  report["initial_norms"] = {{"m_n", norm_to_json(initial_mn)},
                             {"omega_n_plus_1", norm_to_json(initial_omega)}};
  json jcurve = json::array();
  for (const CurvePoint& pt : curve) {
    json norms;
    for (const auto& [key, est] : pt.norms) norms[key] = norm_to_json(est);
    jcurve.push_back({{"t", pt.t},
                      {"mass", pt.mass},
                      {"l1_distance", std::isfinite(pt.l1) ? json(pt.l1) : json()},
                      {"l1_err", std::isfinite(pt.l1_err) ? json(pt.l1_err) : json()},
                      {"l1_bias", std::isfinite(pt.l1_bias) ? json(pt.l1_bias) : json()},
                      {"norms", norms}});
  }
  report["curve"] = jcurve;

  int failed = 0;
  if (cfg.fit_enabled) {
    FitResult fit = fit_decay(curve, cfg.fit_window_lo, cfg.fit_window_hi, cfg.fit_model);
    report["fit"] = {{"exponent", fit.exponent},
                     {"ci", {fit.ci_lo, fit.ci_hi}},
                     {"model", fit.log_correction ? "power_with_log" : "pure_power"},
                     {"log_power", fit.log_power},
                     {"window_requested", {cfg.fit_window_lo, cfg.fit_window_hi}},
                     {"window_used", {fit.window_lo, fit.window_hi}},
                     {"n_points", fit.n_points},
                     {"shrunk", fit.shrunk},
                     {"refused", fit.refused},
                     {"note", fit.note}};
  }

  json verdicts = json::array();
  for (const VerificationSpec& spec : cfg.verifications) {
    json v = run_verification(spec, cfg, wall, cfg.workers);
    if (v.value("verdict", std::string()) == "FAIL") ++failed;
    verdicts.push_back(std::move(v));
  }
  report["verdicts"] = verdicts;

  std::uint64_t diffuse = 0, specular = 0, grazing = 0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    diffuse += ens.n_diffuse[i];
    specular += ens.n_specular[i];
    grazing += ens.n_grazing[i];
  }
  report["events"] = {{"diffuse", diffuse}, {"specular", specular}, {"grazing", grazing}};
  report["checkpoints"] = ckpt_path.empty() ? json::array() : json::array({ckpt_path});

  // content hash over everything except timing
  report["content_hash"] = hash_hex(fnv1a(report.dump()));
  auto t_end = std::chrono::steady_clock::now();
  report["timing"] = {
      {"seconds", std::chrono::duration<double>(t_end - t_start).count()}};

  std::string report_path = (fs::path(cfg.output_dir) / "report.json").string();
  {
    std::ofstream out(report_path);
    out << report.dump(2) << "\n";
  }
  return {std::move(report), report_path, csv_path, failed};
}

RunOutcome resume(const std::string& checkpoint_path, double until,
                  const RunOverrides& overrides, const std::optional<json>& config_override) {
  std::uint64_t stored_hash = 0;
  std::string stored_cfg;
  Ensemble ens = load_checkpoint(checkpoint_path, &stored_hash, &stored_cfg);
  json cfg_json = json::parse(stored_cfg);

  if (config_override) {
    // only observables / fit / output may change across a resume
    json a = cfg_json, b = *config_override;
    for (const char* key : {"observables", "fit", "output"}) {
      a.erase(key);
      b.erase(key);
    }
    if (a != b) {
      for (auto& [key, value] : a.items()) {
        if (!b.contains(key) || b[key] != value)
          throw ConfigError("resume: config override changes run-defining key '" + key + "'");
      }
      throw ConfigError("resume: config override changes run-defining keys");
    }
    cfg_json = *config_override;
  }
  ExperimentConfig cfg = parse_config(cfg_json);
  if (overrides.n_particles && *overrides.n_particles != ens.size())
    throw ConfigError("resume: n_particles cannot change across a resume");
  if (cfg.n_particles != ens.size())
    throw ConfigError("resume: checkpoint particle count disagrees with the config");
  if (until <= ens.clock)
    throw ConfigError("resume: --until must exceed the checkpoint clock");

  RunOverrides ov = overrides;
  ov.seed.reset();  // seed is part of the checkpoint

  // rebuild the remaining checkpoint schedule and continue
  ExperimentConfig continued = cfg;
  continued.t_max = until;
  std::vector<double> times;
  for (double t : cfg.checkpoint_times)
    if (t > ens.clock && t <= until) times.push_back(t);
  if (times.empty() || times.back() < until) times.push_back(until);
  continued.checkpoint_times = times;
  if (ov.workers) continued.workers = *ov.workers;
  if (ov.output_dir) continued.output_dir = *ov.output_dir;

  auto t_start = std::chrono::steady_clock::now();
  WallModel wall(continued.domain, continued.theta, continued.alpha, continued.c0);
  AdvanceOptions opts;
  opts.workers = continued.workers;

  std::vector<CurvePoint> curve;
  bool has_closed_equilibrium = continued.theta.kind == BoundaryField::Kind::Constant;
  EquilibriumModel eq = has_closed_equilibrium
                            ? EquilibriumModel::constant_theta(continued.theta.params[0])
                            : EquilibriumModel::constant_theta(1.0);
  for (double t : continued.checkpoint_times) {
    advance(ens, t - ens.clock, continued.domain, wall, opts);
    CurvePoint pt;
    pt.t = t;
    pt.mass = ens.mass();
    if (has_closed_equilibrium) {
      L1Record rec = l1_distance(ens, eq, continued.domain, continued.binning);
      pt.l1 = rec.distance;
      pt.l1_err = rec.err_sampling;
      pt.l1_bias = rec.bias_proxy;
    }
    for (const WeightSpec& w : continued.observables)
      pt.norms[w.key()] = weighted_norm(ens, w, continued.domain, wall.c4());
    curve.push_back(std::move(pt));
  }

  fs::create_directories(continued.output_dir);
  std::string ckpt_path = (fs::path(continued.output_dir) / "final.ckpt").string();
  save_checkpoint(ens, stored_hash, stored_cfg, ckpt_path);

  std::string csv_path = (fs::path(continued.output_dir) / "curve.csv").string();
  {
    std::ofstream csv(csv_path);
    csv << "t,mass,l1_distance,l1_err";
    for (const WeightSpec& w : continued.observables) csv << ",norm_" << w.key();
    csv << "\n";
    for (const CurvePoint& pt : curve) {
      csv << format_g(pt.t) << "," << format_g(pt.mass) << "," << format_g(pt.l1) << ","
          << format_g(pt.l1_err);
      for (const WeightSpec& w : continued.observables)
        csv << "," << format_g(pt.norms.at(w.key()).value);
      csv << "\n";
    }
  }

  json report;
  report["version"] = kToolVersion;
  report["config"] = cfg_json;
  report["config_hash"] = hash_hex(stored_hash);
  report["resumed_from"] = checkpoint_path;
  report["until"] = until;
  json jcurve = json::array();
  for (const CurvePoint& pt : curve) {
    json norms;
    for (const auto& [key, est] : pt.norms) norms[key] = norm_to_json(est);
    jcurve.push_back({{"t", pt.t}, {"mass", pt.mass},
                      {"l1_distance", std::isfinite(pt.l1) ? json(pt.l1) : json()},
                      {"norms", norms}});
  }
  report["curve"] = jcurve;
  report["checkpoints"] = json::array({ckpt_path});
  report["content_hash"] = hash_hex(fnv1a(report.dump()));
  auto t_end = std::chrono::steady_clock::now();
  report["timing"] = {
      {"seconds", std::chrono::duration<double>(t_end - t_start).count()}};
  std::string report_path = (fs::path(continued.output_dir) / "report.json").string();
  {
    std::ofstream out(report_path);
    out << report.dump(2) << "\n";
  }
  return {std::move(report), report_path, csv_path, 0};
}

// --- verify suites -------------------------------------------------------------

namespace {

constexpr double kPi2 = std::numbers::pi;

struct CheckPrinter {
  int failed = 0;
  void line(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%-52s %s  %s\n", name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++failed;
  }
};

// independent grid + bisection root used only by the verify suite
double bisect_exit(const Domain& d, const Vec& x, const Vec& v) {
  double speed = norm(v);
  double hi_t = (d.diameter() + d.inradius()) / speed;
  int grid = 4096;
  double prev = 0.0, prev_f = d.levelset(x);
  for (int k = 1; k <= grid; ++k) {
    double t = hi_t * k / grid;
    double f = d.levelset(x + t * v);
    if (f >= 0.0) {
      double lo = prev, hi = t;
      for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (lo + hi);
        if (d.levelset(x + m * v) >= 0.0) hi = m; else lo = m;
      }
      return 0.5 * (lo + hi);
    }
    prev = t;
    prev_f = f;
  }
  (void)prev_f;
  return hi_t;
}

Vec random_interior(const Domain& d, CounterRng& rng) {
  double R = d.bounding_radius();
  while (true) {
    Vec x{(2.0 * rng.next_double() - 1.0) * R, (2.0 * rng.next_double() - 1.0) * R, 0.0};
    if (d.dim() == 3) x.z = (2.0 * rng.next_double() - 1.0) * R;
    if (d.levelset(x) < -1e-6 * R) return x;
  }
}

Vec random_direction(int dim, CounterRng& rng) {
  if (dim == 2) {
    double phi = 2.0 * kPi2 * rng.next_double();
    return {std::cos(phi), std::sin(phi), 0.0};
  }
  double ct = 2.0 * rng.next_double() - 1.0;
  double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  double phi = 2.0 * kPi2 * rng.next_double();
  return {st * std::cos(phi), st * std::sin(phi), ct};
}

int verify_geometry(std::uint64_t seed) {
  CheckPrinter out;
  std::vector<Domain> domains{Domain::disk(1.0), Domain::ellipse(2.0, 1.0),
                              Domain::star(1.0, 0.1, 5), Domain::ellipsoid(1.0, 0.8, 0.6)};
  for (const Domain& d : domains) {
    CounterRng rng(seed, 0x6E0ULL + static_cast<std::uint64_t>(d.kind()));
    double worst_oracle = 0.0, worst_fd = 0.0, worst_chord = 0.0, worst_scale = 0.0;
    int n_rays = 1000;
    for (int k = 0; k < n_rays; ++k) {
      Vec x = random_interior(d, rng);
      Vec dir = random_direction(d.dim(), rng);
      double speed = 0.25 + 3.0 * rng.next_double();
      Vec v = speed * dir;
      double sigma = d.exit_time(x, v);
      worst_oracle = std::max(worst_oracle, std::abs(sigma - bisect_exit(d, x, v)));
      double sigma_back = d.exit_time(x, -1.0 * v);
      worst_chord =
          std::max(worst_chord, (sigma + sigma_back) - d.diameter() / speed);
      double lambda = 0.5 + 2.0 * rng.next_double();
      worst_scale = std::max(worst_scale,
                             std::abs(d.exit_time(x, lambda * v) - sigma / lambda));
      // v . grad_x sigma = -1 by central differences, skipping grazing rays
      Vec q = x + sigma * v;
      Vec nq = d.inward_normal(q);
      if (std::abs(dot(v, nq)) > 0.1 * speed) {
        double h = 1e-6;
        double acc = 0.0;
        Vec e[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        for (int a = 0; a < d.dim(); ++a) {
          double sp = d.exit_time(x + h * e[a], v);
          double sm = d.exit_time(x - h * e[a], v);
          acc += (sp - sm) / (2.0 * h) * (a == 0 ? v.x : a == 1 ? v.y : v.z);
        }
        worst_fd = std::max(worst_fd, std::abs(acc + 1.0));
      }
    }
    out.line("geometry/" + d.kind_name() + "/oracle_agreement", worst_oracle < 1e-9,
             "max |sigma - bisection| = " + format_g(worst_oracle));
    out.line("geometry/" + d.kind_name() + "/fd_identity", worst_fd < 1e-4,
             "max |v.grad sigma + 1| = " + format_g(worst_fd));
    out.line("geometry/" + d.kind_name() + "/chord_bound", worst_chord < 1e-9,
             "max excess = " + format_g(worst_chord));
    out.line("geometry/" + d.kind_name() + "/scaling", worst_scale < 1e-9,
             "max |sigma(l v) - sigma/l| = " + format_g(worst_scale));
  }
  return out.failed;
}

int verify_wall(std::uint64_t seed) {
  CheckPrinter out;
  for (int n : {2, 3}) {
    Domain d = (n == 2) ? Domain::disk(1.0) : Domain::ellipsoid(1.0, 1.0, 1.0);
    for (double theta : {0.25, 1.0, 4.0}) {
      WallModel wall(d, BoundaryField::constant(theta), BoundaryField::constant(1.0), 0.5);
      Vec xb = d.boundary_samples(4)[0];
      double angular = (n == 2) ? 2.0 : kPi2;
      double flux = integrate(
          [&](double s) { return wall.maxwellian_speed(xb, s, n) * std::pow(s, n); }, 0.0,
          16.0 * std::sqrt(theta), 1e-13);
      double err = std::abs(angular * flux - 1.0);
      out.line("wall/normalization/theta=" + format_g(theta) + "/n=" + std::to_string(n),
               err < 1e-10, "|flux - 1| = " + format_g(err));
    }
  }
  // sampler checks at theta = 1 on the unit disk
  Domain d = Domain::disk(1.0);
  WallModel wall(d, BoundaryField::constant(1.0), BoundaryField::constant(1.0), 0.5);
  Vec xb{1.0, 0.0, 0.0};
  Vec nrm{-1.0, 0.0, 0.0};
  CounterRng rng(seed, 0xA11ULL);
  std::size_t N = 100000;
  std::vector<double> u_samples(N);
  double mean_un = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    Vec v = wall.sample_diffuse(xb, nrm, 2, rng);
    u_samples[i] = dot(v, nrm);
    mean_un += u_samples[i] / static_cast<double>(N);
  }
  double expect_un = std::sqrt(kPi2 / 2.0);  // quadrature value of E[v.n] at theta = 1
  double se = std::sqrt((2.0 - kPi2 / 2.0) / static_cast<double>(N));
  out.line("wall/sampler_mean_normal_speed", std::abs(mean_un - expect_un) < 3.0 * se,
           "mean = " + format_g(mean_un) + " expected " + format_g(expect_un));
  std::vector<double> grid, cdf;
  for (int k = 0; k <= 4000; ++k) {
    double u = 6.0 * k / 4000.0;
    grid.push_back(u);
    cdf.push_back(1.0 - std::exp(-0.5 * u * u));
  }
  double ks = ks_statistic_vs_cdf(u_samples, grid, cdf);
  double crit = 1.6276 / std::sqrt(static_cast<double>(N));
  out.line("wall/sampler_normal_speed_ks", ks < crit,
           "ks = " + format_g(ks) + " crit = " + format_g(crit));
  return out.failed;
}

int verify_lyapunov(int workers, std::uint64_t seed) {
  CheckPrinter out;
  for (const Domain& d : {Domain::disk(1.0), Domain::ellipse(2.0, 1.0)}) {
    WallModel wall(d, BoundaryField::constant(1.0), BoundaryField::constant(1.0), 0.9375);
    for (int lcase : {1, 3}) {
      auto res = lyapunov_audit(InitialData::uniform_maxwellian(1.0), 5.0, lcase, 3.0, 0.6,
                                20000, seed, d, wall, 33, workers);
      out.line("lyapunov/" + d.kind_name() + "/case" + std::to_string(lcase),
               res.verdict == "PASS", "margin = " + format_g(res.margin));
    }
  }
  return out.failed;
}

int verify_doeblin(int workers, std::uint64_t seed) {
  CheckPrinter out;
  Domain d = Domain::disk(1.0);
  WallModel wall(d, BoundaryField::constant(1.0), BoundaryField::constant(1.0), 0.9375);
  DoeblinOptions opt;
  opt.n_particles = 50000;
  opt.n_initial_cells = 3;
  opt.seed = seed;
  opt.workers = workers;
  auto res = doeblin_probe(opt, d, wall);
  out.line("doeblin/disk_diffuse_quick", res.verdict != "FAIL",
           res.verdict + " min_density = " + format_g(res.min_density));
  return out.failed;
}

int verify_stationarity(int workers, std::uint64_t seed) {
  CheckPrinter out;
  Domain d = Domain::disk(1.0);
  WallModel wall(d, BoundaryField::constant(1.0), BoundaryField::constant(1.0), 0.9375);
  auto res = stationarity_test(InitialData::equilibrium(1.0), 0.0, 10.0, 20000, seed, d, wall,
                               0.01, workers);
  for (const auto& t : res.tests)
    out.line("stationarity/" + t.name, t.pass,
             "stat = " + format_g(t.statistic) + " crit = " + format_g(t.critical));
  return out.failed;
}

int verify_absorbing(std::uint64_t) {
  CheckPrinter out;
  Domain d = Domain::disk(1.0);
  InitialData annulus = InitialData::annulus_speed(1.0, 2.0);
  auto exp_res =
      absorbing_bound_check(annulus, WeightSpec::exp_sigma(), {0.5, 1.0, 2.0, 4.0}, d, 1 << 17);
  out.line("absorbing/exp_sigma_bound", exp_res.pass,
           "norm = " + format_g(exp_res.norm_value));
  auto poly_res =
      absorbing_bound_check(annulus, WeightSpec::r_poly(2.0), {1.0, 3.0, 10.0, 30.0}, d, 1 << 17);
  out.line("absorbing/r_poly_bound", poly_res.pass, "norm = " + format_g(poly_res.norm_value));
  return out.failed;
}

}  // namespace

int verify_suite(const std::string& name, int workers, std::uint64_t seed) {
  if (name == "geometry") return verify_geometry(seed);
  if (name == "wall") return verify_wall(seed);
  if (name == "lyapunov") return verify_lyapunov(workers, seed);
  if (name == "doeblin") return verify_doeblin(workers, seed);
  if (name == "stationarity") return verify_stationarity(workers, seed);
  if (name == "absorbing") return verify_absorbing(seed);
  if (name == "all") {
    std::printf("verify all: geometry + wall + lyapunov + doeblin + stationarity + absorbing\n");
    std::printf("runtime budget: roughly 3 minutes at desk scale\n");
    int failed = 0;
    for (const char* suite :
         {"geometry", "wall", "lyapunov", "doeblin", "stationarity", "absorbing"})
      failed += verify_suite(suite, workers, seed);
    return failed;
  }
  throw std::invalid_argument("verify: unknown suite '" + name +
                              "' (geometry, wall, lyapunov, doeblin, stationarity, absorbing, "
                              "all)");
}

}  // namespace knudsen
