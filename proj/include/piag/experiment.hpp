#pragma once

#include <optional>
#include <string>
#include <vector>

#include "piag/engine.hpp"
#include "piag/problems.hpp"
#include "piag/reference.hpp"
#include "piag/text_format.hpp"
#include "piag/theory.hpp"

namespace piag {

/// Exit statuses of run_experiment and the CLI.
enum ExitCode : int { kExitPass = 0, kExitCheckFailure = 1, kExitInvalidInput = 2, kExitOracleFailure = 3 };

struct InstanceSpec {
  InstanceKind kind = InstanceKind::quadratic;
  std::size_t m = 8;
  Eigen::Index n = 10;
  double mu = 1.0;
  double L = 10.0;
  std::uint64_t seed = 1;
  Regularizer regularizer;
};

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::cyclic;
  int K = 7;
  std::uint64_t seed = 1;
};

/// Flat `key = value` experiment description; see README for every key.
struct ExperimentConfig {
  InstanceSpec instance;
  ScheduleSpec schedule;
  StepSizePolicy step;
  StopRule stop{200000, 1e-8};
  bool epsilon_relative = true;  // stop.epsilon is a fraction of F_0
  std::vector<int> sweep_K;
  std::vector<double> sweep_Q;
  std::string output_dir = "piag_out";
  std::string reference_cache;  // empty: no disk cache
  double tol = 1e-9;            // absolute tolerance is tol * max(1, F_0)
  std::uint64_t x0_seed = 2;
  double x0_scale = 2.0;
  int threads = 1;
};

ExperimentConfig parse_config(const KeyValueDoc& doc);
ExperimentConfig load_config(const std::string& path);
/// Throws InputError naming the first offending field.
void validate_config(const ExperimentConfig& config);

struct SweepPoint {
  double Q = 1.0;
  int K = 0;
  std::string name;  // e.g. "Q10_K4"
};

/// Q-major grid over the sweep axes; an empty axis falls back to the base value.
std::vector<SweepPoint> sweep_points(const ExperimentConfig& config);

CompositeProblem build_instance(const ExperimentConfig& config, const SweepPoint& point);
Vector initial_point(const ExperimentConfig& config, const CompositeProblem& problem);

struct PointResult {
  SweepPoint point;
  double eta = 0.0;
  double F0 = 0.0;
  double measured_rate = 0.0;
  double eq7_rate = 0.0;
  double eq8_rate = 0.0;
  long long hit_iter = -1;
  long long budget = 0;
  CheckReport report;
  RunTrace trace;
  ReferenceSolution reference;
  bool oracle_failed = false;
  std::string error;
};

/// Geometric mean of F_{k+1}/F_k over the second half of the trace.
double measured_tail_rate(const RunTrace& trace);

/// Solves the reference, runs PIAG and every applicable check for one point.
PointResult run_point(const ExperimentConfig& config, const SweepPoint& point);

/// rates.csv: `Q,K,eta,measured_rate,eq7_rate,eq8_rate,hit_iter,budget`.
std::string emit_rate_table(const std::vector<PointResult>& results);

struct RateSlope {
  double Q = 0.0;
  std::size_t points = 0;
  double slope_hit_vs_k1 = 0.0;  // least squares hit_iter ~ a + b (K+1)
  double loglog_slope = 0.0;     // least squares log hit_iter ~ a + b log(K+1)
};

/// One slope per Q with at least two converged K points.
std::vector<RateSlope> rate_slopes(const std::vector<PointResult>& results);
std::string rate_slopes_csv(const std::vector<RateSlope>& slopes);

/// Runs the whole sweep, writes the outputs, returns an ExitCode.
int run_experiment(const ExperimentConfig& config);

}  // namespace piag
