#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "platoon/instance.hpp"
#include "platoon/metrics.hpp"
#include "platoon/solver.hpp"

namespace platoon {

// Full case-study sweep: scenarios are the cross product of departure
// spreads and wait budgets, each run over every seed.
struct ExperimentConfig {
  int grid_rows = 10;
  int grid_cols = 10;
  int n_vehicles = 12;
  std::vector<double> departure_stddevs = {10.0};
  std::vector<Rational> max_waits = {Rational(0), Rational(10)};
  DepartureDistribution departure;  // stddev replaced per scenario
  Rational eta = Rational(1, 10);
  Rational wait_cost_rate;
  EconomicParams econ;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  SolverConfig solver;
  int workers = 1;  // concurrent scenario runs
  std::string output_dir = "experiment_out";
};

struct ScenarioResult {
  double sigma = 0;
  Rational p;
  std::vector<std::string> statuses;  // coordinated solve status per seed
  std::vector<std::string> errors;    // per-seed failure message, empty when fine
  int completed = 0;
  Rational coordinated_mean_vmt_ratio, coordinated_mean_wait;
  Rational opportunistic_mean_vmt_ratio, opportunistic_mean_wait;
};

struct ExperimentResult {
  std::vector<ScenarioResult> scenarios;  // stddev-major, wait-minor
  int failed_runs = 0;
  std::string output_dir;
};

// One per-vehicle-sample row set, labeled with its scenario coordinates.
struct LabeledReport {
  double sigma = 0;
  Rational p;
  std::string kind;  // "coordinated" | "opportunistic"
  std::uint64_t seed = 0;
  MetricsReport report;
};

// Runs every (stddev, max_wait, seed) cell, writing per-run artifacts under
// output_dir/<scenario>/seed<k>/, a summary.csv, and the plot data files.
// Failures are recorded and skipped; the sweep always finishes.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Box-plot feeds: one row per vehicle sample, grouped by scenario.
void emit_plot_data(const std::string& dir, const std::vector<LabeledReport>& reports);

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_json(const ExperimentConfig& cfg);

}  // namespace platoon
