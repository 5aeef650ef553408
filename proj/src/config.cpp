#include "knudsen/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace knudsen {

namespace {

double require_number(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(path + "." + key + ": required number is missing");
  return j[key].get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  return (j.contains(key) && j[key].is_number()) ? j[key].get<double>() : fallback;
}

BoundaryField parse_field(const json& j, const std::string& path) {
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError(path + ".kind: required string is missing");
  std::string kind = j["kind"].get<std::string>();
  json p = j.value("params", json::object());
  if (kind == "constant") {
    return BoundaryField::constant(require_number(p, path + ".params", "value"));
  }
  if (kind == "linear") {
    return BoundaryField::linear(number_or(p, "ax", 0.0), number_or(p, "ay", 0.0),
                                 number_or(p, "az", 0.0),
                                 require_number(p, path + ".params", "offset"));
  }
  if (kind == "sinusoidal") {
    return BoundaryField::sinusoidal(require_number(p, path + ".params", "mean"),
                                     require_number(p, path + ".params", "amplitude"),
                                     number_or(p, "mode", 1.0), number_or(p, "phase", 0.0));
  }
  throw ConfigError(path + ".kind: unknown field kind '" + kind +
                    "' (catalog: constant, linear, sinusoidal)");
}

json echo_field(const BoundaryField& f) {
  json p;
  switch (f.kind) {
    case BoundaryField::Kind::Constant:
      return {{"kind", "constant"}, {"params", {{"value", f.params[0]}}}};
    case BoundaryField::Kind::Linear:
      return {{"kind", "linear"},
              {"params",
               {{"ax", f.params[0]}, {"ay", f.params[1]}, {"az", f.params[2]},
                {"offset", f.params[3]}}}};
    case BoundaryField::Kind::Sinusoidal:
      return {{"kind", "sinusoidal"},
              {"params",
               {{"mean", f.params[0]}, {"amplitude", f.params[1]}, {"mode", f.params[2]},
                {"phase", f.params[3]}}}};
  }
  return p;
}

Domain parse_domain(const json& j) {
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("domain.kind: required string is missing");
  std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "disk") return Domain::disk(require_number(j, "domain", "radius"));
    if (kind == "ellipse")
      return Domain::ellipse(require_number(j, "domain", "a"), require_number(j, "domain", "b"));
    if (kind == "ellipsoid")
      return Domain::ellipsoid(require_number(j, "domain", "a"),
                               require_number(j, "domain", "b"),
                               require_number(j, "domain", "c"));
    if (kind == "star")
      return Domain::star(require_number(j, "domain", "r0"),
                          require_number(j, "domain", "amplitude"),
                          static_cast<int>(require_number(j, "domain", "mode")));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
  throw ConfigError("domain.kind: unknown kind '" + kind +
                    "' (catalog: disk, ellipse, ellipsoid, star)");
}

json echo_domain(const Domain& d) {
  switch (d.kind()) {
    case DomainKind::Disk: return {{"kind", "disk"}, {"radius", d.params()[0]}};
    case DomainKind::Ellipse:
      return {{"kind", "ellipse"}, {"a", d.params()[0]}, {"b", d.params()[1]}};
    case DomainKind::Ellipsoid:
      return {{"kind", "ellipsoid"},
              {"a", d.params()[0]},
              {"b", d.params()[1]},
              {"c", d.params()[2]}};
    case DomainKind::Star:
      return {{"kind", "star"},
              {"r0", d.params()[0]},
              {"amplitude", d.params()[1]},
              {"mode", static_cast<int>(d.params()[2])}};
  }
  return {};
}

InitialData parse_initial(const json& j) {
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("initial.kind: required string is missing");
  std::string kind = j["kind"].get<std::string>();
  json p = j.value("params", json::object());
  try {
    if (kind == "equilibrium")
      return InitialData::equilibrium(require_number(p, "initial.params", "theta"));
    if (kind == "uniform_maxwellian")
      return InitialData::uniform_maxwellian(require_number(p, "initial.params", "theta0"));
    if (kind == "half_domain_maxwellian")
      return InitialData::half_domain_maxwellian(require_number(p, "initial.params", "theta0"));
    if (kind == "annulus_speed")
      return InitialData::annulus_speed(require_number(p, "initial.params", "vmin"),
                                        require_number(p, "initial.params", "vmax"));
    if (kind == "product_grid") {
      if (!p.contains("speed_edges") || !p.contains("speed_weights"))
        throw ConfigError("initial.params: product_grid needs speed_edges and speed_weights");
      return InitialData::product_grid(p["speed_edges"].get<std::vector<double>>(),
                                       p["speed_weights"].get<std::vector<double>>());
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("initial: ") + e.what());
  }
  throw ConfigError("initial.kind: unknown kind '" + kind +
                    "' (catalog: equilibrium, uniform_maxwellian, half_domain_maxwellian, "
                    "annulus_speed, product_grid)");
}

json echo_initial(const InitialData& d) {
  json p;
  switch (d.kind) {
    case InitialData::Kind::Equilibrium: p = {{"theta", d.theta0}}; break;
    case InitialData::Kind::UniformMaxwellian:
    case InitialData::Kind::HalfDomainMaxwellian: p = {{"theta0", d.theta0}}; break;
    case InitialData::Kind::UniformAnnulusSpeed:
      p = {{"vmin", d.vmin}, {"vmax", d.vmax}};
      break;
    case InitialData::Kind::ProductGrid:
      p = {{"speed_edges", d.speed_edges}, {"speed_weights", d.speed_weights}};
      break;
  }
  return {{"kind", d.kind_name()}, {"params", p}};
}

WeightSpec parse_weight(const json& j) {
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("observables.weights[].kind: required string is missing");
  std::string kind = j["kind"].get<std::string>();
  if (kind == "omega") return WeightSpec::omega(static_cast<int>(require_number(j, "weight", "i")));
  if (kind == "m") return WeightSpec::m(static_cast<int>(require_number(j, "weight", "i")));
  if (kind == "tilde")
    return WeightSpec::tilde(static_cast<int>(require_number(j, "weight", "i")));
  if (kind == "bracket_power_log")
    return WeightSpec::bracket_power_log(require_number(j, "weight", "i"),
                                         require_number(j, "weight", "log_exp"));
  if (kind == "w1_log") return WeightSpec::w1_log();
  if (kind == "w0_log") return WeightSpec::w0_log();
  if (kind == "r_poly") return WeightSpec::r_poly(require_number(j, "weight", "nu"));
  if (kind == "exp_sigma") return WeightSpec::exp_sigma();
  throw ConfigError("observables.weights[].kind: unknown kind '" + kind + "'");
}

json echo_weight(const WeightSpec& w) {
  switch (w.kind) {
    case WeightSpec::Kind::Omega: return {{"kind", "omega"}, {"i", w.i}};
    case WeightSpec::Kind::M: return {{"kind", "m"}, {"i", w.i}};
    case WeightSpec::Kind::Tilde: return {{"kind", "tilde"}, {"i", w.i}};
    case WeightSpec::Kind::BracketPowerLog:
      return {{"kind", "bracket_power_log"}, {"i", w.i}, {"log_exp", w.log_exp}};
    case WeightSpec::Kind::W1Log: return {{"kind", "w1_log"}};
    case WeightSpec::Kind::W0Log: return {{"kind", "w0_log"}};
    case WeightSpec::Kind::RPoly: return {{"kind", "r_poly"}, {"nu", w.nu}};
    case WeightSpec::Kind::ExpSigma: return {{"kind", "exp_sigma"}};
  }
  return {};
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  if (!j.contains("domain")) throw ConfigError("domain: required section is missing");
  cfg.domain = parse_domain(j["domain"]);

  if (!j.contains("wall")) throw ConfigError("wall: required section is missing");
  const json& wj = j["wall"];
  if (!wj.contains("theta")) throw ConfigError("wall.theta: required section is missing");
  if (!wj.contains("alpha")) throw ConfigError("wall.alpha: required section is missing");
  cfg.theta = parse_field(wj["theta"], "wall.theta");
  cfg.alpha = parse_field(wj["alpha"], "wall.alpha");
  cfg.c0 = require_number(wj, "wall", "c0");
  if (!(cfg.c0 > 0.0 && cfg.c0 < 1.0)) throw ConfigError("wall.c0: must lie in (0,1)");

  if (!j.contains("initial")) throw ConfigError("initial: required section is missing");
  cfg.initial = parse_initial(j["initial"]);

  if (!j.contains("run")) throw ConfigError("run: required section is missing");
  const json& rj = j["run"];
  if (!rj.contains("seed") || !rj["seed"].is_number())
    throw ConfigError("run.seed: required (no wall-clock seeding)");
  cfg.seed = rj["seed"].get<std::uint64_t>();
  cfg.n_particles = static_cast<std::size_t>(require_number(rj, "run", "n_particles"));
  if (cfg.n_particles < 1000) throw ConfigError("run.n_particles: must be >= 1000");
  cfg.t_max = require_number(rj, "run", "t_max");
  if (!(cfg.t_max > 0.0)) throw ConfigError("run.t_max: must be > 0");
  cfg.workers = static_cast<int>(number_or(rj, "workers", 1.0));
  if (cfg.workers < 1) throw ConfigError("run.workers: must be >= 1");

  if (rj.contains("checkpoint_times")) {
    cfg.checkpoint_times = rj["checkpoint_times"].get<std::vector<double>>();
    for (std::size_t k = 0; k < cfg.checkpoint_times.size(); ++k) {
      if (cfg.checkpoint_times[k] <= 0.0 ||
          (k > 0 && cfg.checkpoint_times[k] <= cfg.checkpoint_times[k - 1]))
        throw ConfigError("run.checkpoint_times: must be positive and strictly increasing");
    }
  } else {
    int n = static_cast<int>(number_or(rj, "checkpoints", 32.0));
    if (n < 2) throw ConfigError("run.checkpoints: must be >= 2");
    double lo = std::min(0.1, 0.5 * cfg.t_max);
    for (int k = 0; k < n; ++k)
      cfg.checkpoint_times.push_back(lo * std::pow(cfg.t_max / lo,
                                                   static_cast<double>(k) / (n - 1)));
    cfg.checkpoint_times.back() = cfg.t_max;
  }

  // build the wall early so validation errors surface at parse time
  try {
    WallModel probe(cfg.domain, cfg.theta, cfg.alpha, cfg.c0);
    cfg.binning = Binning::defaults(cfg.domain, probe.theta_max());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const json obs = j.value("observables", json::object());
  if (obs.contains("weights"))
    for (const json& w : obs["weights"]) cfg.observables.push_back(parse_weight(w));
  if (obs.contains("binning")) {
    const json& bj = obs["binning"];
    cfg.binning.spatial_per_axis =
        static_cast<int>(number_or(bj, "spatial_per_axis", cfg.binning.spatial_per_axis));
    cfg.binning.n_shells = static_cast<int>(number_or(bj, "n_shells", cfg.binning.n_shells));
    cfg.binning.n_sectors = static_cast<int>(number_or(bj, "n_sectors", cfg.binning.n_sectors));
    cfg.binning.v_cut = number_or(bj, "v_cut", cfg.binning.v_cut);
  }

  if (j.contains("fit")) {
    const json& fj = j["fit"];
    cfg.fit_enabled = fj.value("enabled", true);
    if (fj.contains("window")) {
      auto w = fj["window"].get<std::vector<double>>();
      if (w.size() != 2 || w[0] >= w[1])
        throw ConfigError("fit.window: expected [lo, hi] with lo < hi");
      cfg.fit_window_lo = w[0];
      cfg.fit_window_hi = w[1];
    }
    std::string model = fj.value("model", std::string("pure_power"));
    if (model == "pure_power") cfg.fit_model = FitModel::pure_power();
    else if (model == "power_with_log")
      cfg.fit_model = FitModel::power_with_log(number_or(fj, "log_power", 0.0));
    else throw ConfigError("fit.model: must be pure_power or power_with_log");
  }

  if (j.contains("verifications")) {
    for (const json& v : j["verifications"]) {
      VerificationSpec spec;
      if (v.is_string()) spec.name = v.get<std::string>();
      else {
        if (!v.contains("name")) throw ConfigError("verifications[].name: required");
        spec.name = v["name"].get<std::string>();
        spec.params = v;
      }
      static const std::vector<std::string> known{"lyapunov", "doeblin", "stationarity",
                                                  "absorbing", "hp"};
      if (std::find(known.begin(), known.end(), spec.name) == known.end())
        throw ConfigError("verifications[].name: unknown verification '" + spec.name + "'");
      cfg.verifications.push_back(std::move(spec));
    }
  }

  const json out = j.value("output", json::object());
  cfg.output_dir = out.value("directory", std::string("out"));
  cfg.write_checkpoints = out.value("write_checkpoints", false);

  // fully resolved echo
  cfg.echo = json{
      {"domain", echo_domain(cfg.domain)},
      {"wall",
       {{"theta", echo_field(cfg.theta)}, {"alpha", echo_field(cfg.alpha)}, {"c0", cfg.c0}}},
      {"initial", echo_initial(cfg.initial)},
      {"run",
       {{"n_particles", cfg.n_particles},
        {"seed", cfg.seed},
        {"t_max", cfg.t_max},
        {"checkpoint_times", cfg.checkpoint_times},
        {"workers", cfg.workers}}},
      {"observables",
       {{"weights", json::array()},
        {"binning",
         {{"spatial_per_axis", cfg.binning.spatial_per_axis},
          {"n_shells", cfg.binning.n_shells},
          {"n_sectors", cfg.binning.n_sectors},
          {"v_cut", cfg.binning.v_cut}}}}},
      {"fit",
       {{"enabled", cfg.fit_enabled},
        {"window", {cfg.fit_window_lo, cfg.fit_window_hi}},
        {"model", cfg.fit_model.log_correction ? "power_with_log" : "pure_power"},
        {"log_power", cfg.fit_model.log_power}}},
      {"verifications", json::array()},
      {"output", {{"directory", cfg.output_dir}, {"write_checkpoints", cfg.write_checkpoints}}}};
  for (const WeightSpec& w : cfg.observables)
    cfg.echo["observables"]["weights"].push_back(echo_weight(w));
  for (const VerificationSpec& v : cfg.verifications) {
    json e = v.params.is_null() ? json{{"name", v.name}} : v.params;
    cfg.echo["verifications"].push_back(e);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a(cfg.echo.dump()); }

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace knudsen
