#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "knudsen/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"knudsen: collisionless-gas simulator and verification toolkit"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, suite, output_dir;
  double until = 0.0;
  std::uint64_t seed = 0;
  std::size_t particles = 0;
  int workers = 0;
  bool strict = false;

  const char* env_out = std::getenv("KNUDSEN_OUTPUT_DIR");

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seed", seed, "override run.seed");
  run->add_option("--particles", particles, "override run.n_particles");
  run->add_option("--workers", workers, "override run.workers");
  run->add_option("--output-dir", output_dir, "override output.directory");
  run->add_flag("--strict", strict, "exit nonzero on any FAIL verdict");

  auto* verify = app.add_subcommand("verify", "run a named verification suite");
  verify->add_option("suite", suite,
                     "geometry | wall | lyapunov | doeblin | stationarity | absorbing | all")
      ->required();
  verify->add_option("--workers", workers, "worker threads");
  verify->add_option("--seed", seed, "suite seed");

  auto* resume_cmd = app.add_subcommand("resume", "continue a checkpointed run");
  resume_cmd->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();
  resume_cmd->add_option("--until", until, "target time")->required();
  resume_cmd->add_option("--workers", workers, "override run.workers");
  resume_cmd->add_option("--output-dir", output_dir, "override output.directory");
  resume_cmd->add_flag("--strict", strict, "exit nonzero on any FAIL verdict");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      knudsen::ExperimentConfig cfg = knudsen::load_config(config_path);
      knudsen::RunOverrides ov;
      if (run->count("--seed")) ov.seed = seed;
      if (run->count("--particles")) ov.n_particles = particles;
      if (run->count("--workers")) ov.workers = workers;
      if (run->count("--output-dir")) ov.output_dir = output_dir;
      else if (env_out) ov.output_dir = std::string(env_out);
      knudsen::RunOutcome out = knudsen::run_experiment(std::move(cfg), ov);
      std::printf("report: %s\ncurve:  %s\n", out.report_path.c_str(), out.csv_path.c_str());
      if (out.n_failed_verdicts > 0)
        std::printf("FAILED verdicts: %d\n", out.n_failed_verdicts);
      return (strict && out.n_failed_verdicts > 0) ? 1 : 0;
    }
    if (verify->parsed()) {
      int w = verify->count("--workers") ? workers : 2;
      std::uint64_t s = verify->count("--seed") ? seed : 20260809ULL;
      int failed = knudsen::verify_suite(suite, w, s);
      std::printf("%s\n", failed == 0 ? "all checks passed" : "some checks FAILED");
      return failed == 0 ? 0 : 1;
    }
    if (resume_cmd->parsed()) {
      knudsen::RunOverrides ov;
      if (resume_cmd->count("--workers")) ov.workers = workers;
      if (resume_cmd->count("--output-dir")) ov.output_dir = output_dir;
      else if (env_out) ov.output_dir = std::string(env_out);
      knudsen::RunOutcome out = knudsen::resume(checkpoint_path, until, ov);
      std::printf("report: %s\ncurve:  %s\n", out.report_path.c_str(), out.csv_path.c_str());
      return (strict && out.n_failed_verdicts > 0) ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
