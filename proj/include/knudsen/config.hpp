#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "knudsen/analysis.hpp"
#include "knudsen/geometry.hpp"
#include "knudsen/transport.hpp"
#include "knudsen/wall.hpp"
#include "knudsen/weights.hpp"

namespace knudsen {

using json = nlohmann::json;

// Raised when a config key fails validation; messages name the key and the
// violated constraint ("wall.c0: must lie in (0,1)").
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct VerificationSpec {
  std::string name;  // lyapunov | doeblin | stationarity | absorbing | hp
  json params;
};

struct ExperimentConfig {
  Domain domain = Domain::disk(1.0);
  BoundaryField theta = BoundaryField::constant(1.0);
  BoundaryField alpha = BoundaryField::constant(1.0);
  double c0 = 0.5;

  InitialData initial = InitialData::equilibrium(1.0);

  std::size_t n_particles = 100000;
  std::uint64_t seed = 0;
  double t_max = 1.0;
  std::vector<double> checkpoint_times;  // resolved (log-spaced default)
  int workers = 1;

  std::vector<WeightSpec> observables;
  Binning binning;

  bool fit_enabled = false;
  double fit_window_lo = 10.0, fit_window_hi = 100.0;
  FitModel fit_model = FitModel::pure_power();

  std::vector<VerificationSpec> verifications;

  std::string output_dir = "out";
  bool write_checkpoints = false;

  json echo;  // fully resolved defaults, reproducing the run
};

ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace knudsen
