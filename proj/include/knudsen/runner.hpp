#pragma once

#include <string>

#include "knudsen/config.hpp"

namespace knudsen {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_particles;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
};

struct RunOutcome {
  json report;
  std::string report_path;
  std::string csv_path;
  int n_failed_verdicts = 0;
};

// Runs a config end to end: sampling, checkpointed evolution, observables,
// optional decay fit and verifications, CSV + JSON report emission.
RunOutcome run_experiment(ExperimentConfig cfg, const RunOverrides& overrides = {});

// Continues a checkpointed run to the given time; the continuation is
// bit-for-bit identical to an uninterrupted run. A config override may only
// change observables / fit / output; run-defining keys are refused.
RunOutcome resume(const std::string& checkpoint_path, double until,
                  const RunOverrides& overrides = {},
                  const std::optional<json>& config_override = {});

// Named verification suites at desk-scale defaults; prints one PASS/FAIL line
// per check with margins. Returns the number of failed checks.
int verify_suite(const std::string& name, int workers, std::uint64_t seed);

}  // namespace knudsen
