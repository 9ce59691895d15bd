// Runs a PIAG experiment sweep: builds instances, solves references, runs the
// method and every applicable convergence check, and writes traces, reports
// and rate tables to the output directory.

#include <iostream>

#include <CLI11.hpp>

#include "piag/errors.hpp"
#include "piag/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Proximal incremental aggregated gradient experiments"};

  std::string config_path;
  std::string out_dir;
  long long max_iters = -1;
  double epsilon = 0.0;
  double tol = 0.0;
  long long seed = -1;
  int threads = 0;
  app.add_option("--config", config_path, "key = value experiment description");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--max-iters", max_iters, "iteration cap (overrides stop.max_iters)");
  app.add_option("--epsilon", epsilon, "stopping accuracy (overrides stop.epsilon)");
  app.add_option("--tol", tol, "relative check tolerance (overrides tol)");
  app.add_option("--seed", seed, "seed for instance and schedule (overrides instance.seed, schedule.seed)");
  app.add_option("--threads", threads, "sweep points run concurrently (overrides threads)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : piag::kExitInvalidInput;
  }

  piag::ExperimentConfig config;
  try {
    if (!config_path.empty()) config = piag::load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (max_iters >= 0) config.stop.max_iters = max_iters;
    if (app.count("--epsilon")) config.stop.epsilon = epsilon;
    if (app.count("--tol")) config.tol = tol;
    if (app.count("--threads")) config.threads = threads;
    if (app.count("--seed")) {
      if (seed < 0) throw piag::InputError("--seed must be nonnegative");
      config.instance.seed = static_cast<std::uint64_t>(seed);
      config.schedule.seed = static_cast<std::uint64_t>(seed);
    }
  } catch (const piag::InputError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return piag::kExitInvalidInput;
  }

  return piag::run_experiment(config);
}
