#pragma once

#include "reachcert/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace reachcert {

struct RunMetrics {
  bool success = false;
  int violation_count = 0;
  double violation_rate = 0.0;  // violations / steps; 0 for a zero-step run
  double final_distance = 0.0;
  double path_length = 0.0;
  double straight_distance = 0.0;
  double path_length_ratio = 1.0;
  int steps = 0;
  double wall_time_s = 0.0;
  double cert_time_s = 0.0;  // summed per-step certification time
};

/// Metrics from the step trace; path length is the sum of segment lengths.
RunMetrics evaluate_run(const RunResult& result, const Scenario& scenario);

/// Mean and sample (N-1) standard deviation; std is 0 for N < 2.
struct Stat {
  double mean = 0.0;
  double std = 0.0;
};
Stat summarize(const std::vector<double>& xs);

struct PlannerAggregate {
  double success_rate = 0.0;  // percent
  Stat violations;
  Stat violation_rate;  // percent
  Stat final_distance;
  Stat path_length_ratio;
  Stat steps;
  Stat wall_time_s;
  double cert_ms_per_step = 0.0;  // total certification time / total steps
};

struct AggregateRow {
  double delta = 0.0;
  int n = 0;
  int attempts = 0;
  bool shortfall = false;
  Stat kappa0;
  Stat kappa_ratio;
  Stat min_lambda;
  PlannerAggregate vanilla;
  PlannerAggregate sos;
};

struct RunRow {
  double delta = 0.0;
  std::string scenario;
  std::string planner;
  std::string termination;
  double kappa0 = 0.0;
  double kappa_ratio = 0.0;
  double min_lambda = 0.0;
  RunMetrics metrics;
};

struct BenchConfig {
  std::vector<double> deltas{0.020, 0.025, 0.030, 0.035, 0.040, 0.050};
  int per_delta = 10;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  GeneratorConfig generator;
};

struct BenchResult {
  std::vector<AggregateRow> rows;
  std::vector<RunRow> runs;  // ordered by delta, scenario, planner (vanilla first)
  std::vector<std::string> warnings;
  double total_time_s = 0.0;
};

/// Seed used for the pool at one delta: every delta gets its own stream.
std::uint64_t delta_seed(std::uint64_t seed, double delta);

/// Generates a pool per delta, runs both planners on every scenario in a work
/// pool and aggregates per delta.
BenchResult run_benchmark(const RobotModel& model, const BenchConfig& cfg);

/// Same, over a fixed scenario list grouped by its delta values.
BenchResult run_benchmark(const std::vector<Scenario>& scenarios, const BenchConfig& cfg);

/// Aggregation over raw rows for one delta (rows of both planners).
AggregateRow aggregate(double delta, const std::vector<RunRow>& runs);

void write_raw_csv(const std::vector<RunRow>& runs, const std::filesystem::path& path);
std::vector<RunRow> read_raw_csv(const std::filesystem::path& path);

/// Writes table{1..4}_*.csv and .txt into `dir`; returns the written paths.
std::vector<std::filesystem::path> write_tables(const std::vector<AggregateRow>& rows,
                                                const std::filesystem::path& dir);

/// Fixed-width text rendering of the four tables.
std::string format_tables(const std::vector<AggregateRow>& rows);

}  // namespace reachcert
