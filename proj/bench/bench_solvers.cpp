// Wall-clock comparison of the solver variants on a ladder of instance
// sizes, asserting along the way that they agree where they must: oracle ==
// exact objective, parallel == serial objective, heuristic >= exact.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <cstdio>
#include <memory>

#include "platoon/adhoc.hpp"
#include "platoon/experiment.hpp"

using namespace platoon;

namespace {

double time_solve(const Instance& inst, const SolverConfig& cfg, Plan& out) {
  const auto start = std::chrono::steady_clock::now();
  out = solve(inst, cfg);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void run_case(const char* label, int rows, int cols, int vehicles, std::uint64_t seed,
              bool with_oracle) {
  auto net = std::make_shared<const RoadNetwork>(
      make_grid(rows, cols, Rational(1), Rational(1)));
  const Instance inst =
      generate_case_study(net, vehicles, DepartureDistribution{}, Rational(10), seed);

  SolverConfig serial;
  serial.time_limit_s = 30.0;
  SolverConfig parallel = serial;
  parallel.threads = 4;
  SolverConfig heuristic;
  heuristic.mode = SolverConfig::Mode::heuristic;

  Plan serial_plan, parallel_plan, heuristic_plan, oracle_plan;
  const double t_serial = time_solve(inst, serial, serial_plan);
  const double t_parallel = time_solve(inst, parallel, parallel_plan);
  const double t_heur = time_solve(inst, heuristic, heuristic_plan);

  std::printf("%-14s b&b(1thr) %8.3fs   b&b(4thr) %8.3fs   heuristic %8.3fs", label,
              t_serial, t_parallel, t_heur);
  const bool both_optimal = serial_plan.status == SolveStatus::optimal &&
                            parallel_plan.status == SolveStatus::optimal;
  if (with_oracle) {
    SolverConfig oracle;
    oracle.mode = SolverConfig::Mode::oracle;
    const double t_oracle = time_solve(inst, oracle, oracle_plan);
    std::printf("   oracle %8.3fs", t_oracle);
    if (serial_plan.status == SolveStatus::optimal &&
        oracle_plan.objective != serial_plan.objective) {
      std::printf("\nFATAL: oracle %s != exact %s\n", oracle_plan.objective.str().c_str(),
                  serial_plan.objective.str().c_str());
      std::exit(1);
    }
  }
  if (!both_optimal) std::printf("   [time limit hit; agreement not required]");
  std::printf("\n");

  if (both_optimal && parallel_plan.objective != serial_plan.objective) {
    std::printf("FATAL: 4-thread objective %s != serial %s\n",
                parallel_plan.objective.str().c_str(), serial_plan.objective.str().c_str());
    std::exit(1);
  }
  if (heuristic_plan.objective < serial_plan.objective) {
    std::printf("FATAL: heuristic beat the exact search's best plan\n");
    std::exit(1);
  }
}

void bench_simulator(int rows, int cols, int vehicles, int repeats) {
  auto net = std::make_shared<const RoadNetwork>(
      make_grid(rows, cols, Rational(1), Rational(1)));
  const auto start = std::chrono::steady_clock::now();
  for (int rep = 0; rep < repeats; ++rep) {
    const Instance inst = generate_case_study(net, vehicles, DepartureDistribution{},
                                              Rational(10), 100 + rep);
    simulate_opportunistic(inst);
  }
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("simulator      %dx%d grid, %d vehicles: %d runs in %.3fs (%.1f ms/run)\n", rows,
              cols, vehicles, repeats, total, 1000.0 * total / repeats);
}

}  // namespace

void bench_experiment_workers() {
  ExperimentConfig cfg;
  cfg.grid_rows = 4;
  cfg.grid_cols = 4;
  cfg.n_vehicles = 5;
  cfg.departure_stddevs = {5.0, 10.0};
  cfg.max_waits = {Rational(0), Rational(5)};
  cfg.seeds = {1, 2, 3};
  cfg.solver.time_limit_s = 30.0;
  const auto base = std::filesystem::temp_directory_path() / "platoon_bench";
  std::filesystem::remove_all(base);

  double serial_total = 0.0;
  for (int workers : {1, 2, 4}) {
    cfg.workers = workers;
    cfg.output_dir = (base / ("w" + std::to_string(workers))).string();
    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult result = run_experiment(cfg);
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (workers == 1) serial_total = total;
    std::printf("experiment     %d worker(s): 12 runs in %.3fs (speedup x%.2f)\n", workers,
                total, serial_total / total);
    if (result.failed_runs != 0) {
      std::printf("FATAL: experiment runs failed\n");
      std::exit(1);
    }
  }
  // worker count must not change the numbers
  for (const char* file : {"w2", "w4"}) {
    std::ifstream a(base / "w1" / "summary.csv"), b(base / file / "summary.csv");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    if (sa.str() != sb.str() || sa.str().empty()) {
      std::printf("FATAL: summary.csv differs between worker counts\n");
      std::exit(1);
    }
  }
}

int main() {
  std::printf("agreement-checked solver benchmark (objectives must match across variants)\n");
  run_case("3x3, 3 veh", 3, 3, 3, 11, true);
  run_case("4x4, 4 veh", 4, 4, 4, 12, true);
  run_case("5x5, 6 veh", 5, 5, 6, 13, false);
  run_case("6x6, 8 veh", 6, 6, 8, 14, false);
  bench_simulator(10, 10, 12, 50);
  bench_experiment_workers();
  std::printf("all agreement checks passed\n");
  return 0;
}
