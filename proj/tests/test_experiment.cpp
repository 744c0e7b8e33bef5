#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "platoon/experiment.hpp"
#include "platoon/io.hpp"

using namespace platoon;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "platoon_experiment_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(std::move(cells));
  }
  return rows;
}

ExperimentConfig tiny_config(const fs::path& dir) {
  ExperimentConfig cfg;
  cfg.grid_rows = 3;
  cfg.grid_cols = 3;
  cfg.n_vehicles = 3;
  cfg.departure_stddevs = {5.0};
  cfg.max_waits = {Rational(0), Rational(2)};
  cfg.seeds = {1, 2};
  cfg.solver.time_limit_s = 30.0;
  cfg.output_dir = dir.string();
  return cfg;
}

}  // namespace

TEST_CASE("tiny sweep writes artifacts and dominance holds") {
  const fs::path dir = fresh_dir("sweep");
  const ExperimentConfig cfg = tiny_config(dir);
  const ExperimentResult result = run_experiment(cfg);

  CHECK(result.failed_runs == 0);
  REQUIRE(result.scenarios.size() == 2);
  for (const ScenarioResult& sc : result.scenarios) {
    CHECK(sc.completed == 2);
    REQUIRE(sc.statuses.size() == 2);
    for (const std::string& s : sc.statuses) CHECK(s == "optimal");
    // coordination can only help the objective, and the VMT ratio tracks that
    CHECK(sc.coordinated_mean_vmt_ratio >= sc.opportunistic_mean_vmt_ratio);
    CHECK(sc.opportunistic_mean_wait == Rational(0));
  }
  // p = 0 forbids waiting entirely
  CHECK(result.scenarios[0].coordinated_mean_wait == Rational(0));

  for (const char* scenario : {"sigma5_p0", "sigma5_p2"}) {
    for (const char* seed : {"seed1", "seed2"}) {
      const fs::path run = dir / scenario / seed;
      for (const char* file :
           {"instance.json", "opportunistic.json", "opportunistic_metrics.json",
            "opportunistic_metrics.csv", "coordinated.json", "coordinated_metrics.json",
            "coordinated_metrics.csv"}) {
        CHECK(fs::exists(run / file));
      }
      CHECK(!fs::exists(run / "error.txt"));
      // the stored plans reload to something the stored instance accepts
      const Instance inst = instance_from_json(load_json_file((run / "instance.json").string()));
      const Plan coord = plan_from_json(load_json_file((run / "coordinated.json").string()));
      const Plan opp = plan_from_json(load_json_file((run / "opportunistic.json").string()));
      CHECK(coord.objective <= opp.objective);
    }
  }

  const auto rows = parse_csv(slurp(dir / "summary.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][0] == "sigma");
  CHECK(rows[1][0] == "5");
  CHECK(rows[1][1] == "0");
  CHECK(rows[2][1] == "2");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    REQUIRE(rows[r].size() == 9);
    CHECK(rows[r][2] == "2");
    CHECK(rows[r][3] == "2");
    const Rational coord = Rational::parse(rows[r][4]);
    const Rational opp = Rational::parse(rows[r][6]);
    CHECK(coord >= opp);
    CHECK(rows[r][8] == "optimal|optimal");
  }
}

TEST_CASE("plot data covers every vehicle of every run") {
  const fs::path dir = fresh_dir("plots");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.max_waits = {Rational(0)};
  run_experiment(cfg);

  const auto waits = parse_csv(slurp(dir / "fig3a_wait.csv"));
  REQUIRE(waits.size() == 1 + 2 * 2 * 3);  // header + kinds * seeds * vehicles
  CHECK(waits[0] == std::vector<std::string>{"sigma", "p", "kind", "seed", "vehicle", "wait_min"});
  std::map<std::string, int> kinds;
  for (std::size_t r = 1; r < waits.size(); ++r) {
    REQUIRE(waits[r].size() == 6);
    CHECK(waits[r][0] == "5");
    CHECK(waits[r][1] == "0");
    ++kinds[waits[r][2]];
    CHECK(waits[r][5] == "0");  // p = 0: nobody waits in either plan
  }
  CHECK(kinds["coordinated"] == 6);
  CHECK(kinds["opportunistic"] == 6);

  const auto ratios = parse_csv(slurp(dir / "fig3b_vmt_ratio.csv"));
  REQUIRE(ratios.size() == waits.size());
  CHECK(ratios[0][5] == "vmt_ratio");
  const auto savings = parse_csv(slurp(dir / "fig4b_savings.csv"));
  REQUIRE(savings.size() == waits.size());
  CHECK(savings[0][5] == "savings_usd");
}

TEST_CASE("reruns and worker counts produce identical bytes") {
  const fs::path dir1 = fresh_dir("workers1");
  const fs::path dir2 = fresh_dir("workers2");
  ExperimentConfig cfg = tiny_config(dir1);
  run_experiment(cfg);
  const std::string summary_first = slurp(dir1 / "summary.csv");
  const std::string plan_first = slurp(dir1 / "sigma5_p2" / "seed1" / "coordinated.json");

  run_experiment(cfg);  // same directory, same bytes
  CHECK(slurp(dir1 / "summary.csv") == summary_first);
  CHECK(slurp(dir1 / "sigma5_p2" / "seed1" / "coordinated.json") == plan_first);

  cfg.output_dir = dir2.string();
  cfg.workers = 2;
  run_experiment(cfg);
  CHECK(slurp(dir2 / "summary.csv") == summary_first);
  CHECK(slurp(dir2 / "sigma5_p2" / "seed1" / "coordinated.json") == plan_first);
  for (const char* file : {"fig3a_wait.csv", "fig3b_vmt_ratio.csv", "fig4b_savings.csv"}) {
    CHECK(slurp(dir2 / file) == slurp(dir1 / file));
  }
}

TEST_CASE("failed runs are recorded and the sweep finishes") {
  const fs::path dir = fresh_dir("failures");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.solver.threads = 0;  // rejected by the solver at run time, not by the sweep
  const ExperimentResult result = run_experiment(cfg);

  CHECK(result.failed_runs == 4);
  REQUIRE(result.scenarios.size() == 2);
  for (const ScenarioResult& sc : result.scenarios) {
    CHECK(sc.completed == 0);
    for (const std::string& s : sc.statuses) CHECK(s == "error");
    for (const std::string& e : sc.errors) CHECK(!e.empty());
  }
  // stages before the failure still left their artifacts behind
  CHECK(fs::exists(dir / "sigma5_p0" / "seed1" / "instance.json"));
  CHECK(fs::exists(dir / "sigma5_p0" / "seed1" / "opportunistic.json"));
  CHECK(fs::exists(dir / "sigma5_p0" / "seed1" / "error.txt"));
  CHECK(!fs::exists(dir / "sigma5_p0" / "seed1" / "coordinated.json"));

  const auto rows = parse_csv(slurp(dir / "summary.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][3] == "0");
  CHECK(rows[1][8] == "error|error");
}

TEST_CASE("config json round-trips") {
  ExperimentConfig cfg;
  cfg.grid_rows = 4;
  cfg.grid_cols = 6;
  cfg.n_vehicles = 7;
  cfg.departure_stddevs = {2.5, 10.0};
  cfg.max_waits = {Rational(0), Rational(5, 2)};
  cfg.departure.low = Rational(1);
  cfg.departure.high = Rational(90);
  cfg.departure.mean = 45.0;
  cfg.eta = Rational(1, 5);
  cfg.wait_cost_rate = Rational(1, 100);
  cfg.econ.value_of_time_usd_h = Rational(25);
  cfg.seeds = {7, 8, 9};
  cfg.solver.mode = SolverConfig::Mode::heuristic;
  cfg.solver.time_limit_s = 12.5;
  cfg.solver.resolution = Rational(1, 2);
  cfg.solver.threads = 3;
  cfg.solver.route_cap = 500;
  cfg.workers = 4;
  cfg.output_dir = "out/dir";

  const nlohmann::json j = experiment_config_json(cfg);
  const ExperimentConfig back = experiment_config_from_json(j);
  CHECK(experiment_config_json(back).dump() == j.dump());
  CHECK(back.max_waits == cfg.max_waits);
  CHECK(back.solver.mode == SolverConfig::Mode::heuristic);
  CHECK(back.solver.resolution == Rational(1, 2));
  CHECK(back.econ.value_of_time_usd_h == Rational(25));

  // defaults survive an empty document
  const ExperimentConfig dflt = experiment_config_from_json(nlohmann::json::object());
  CHECK(dflt.grid_rows == 10);
  CHECK(dflt.max_waits == std::vector<Rational>{Rational(0), Rational(10)});
  CHECK(dflt.seeds.size() == 5);

  CHECK_THROWS_AS(experiment_config_from_json({{"solver", {{"mode", "fancy"}}}}),
                  ValidationError);
}

TEST_CASE("config validation") {
  const fs::path dir = fresh_dir("validation");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.departure_stddevs.clear();
  CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
  cfg = tiny_config(dir);
  cfg.max_waits = {Rational(-1)};
  CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
  cfg = tiny_config(dir);
  cfg.seeds.clear();
  CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
  cfg = tiny_config(dir);
  cfg.workers = 0;
  CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
  cfg = tiny_config(dir);
  cfg.n_vehicles = 0;
  CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
  cfg = tiny_config(dir);
  cfg.output_dir.clear();
  CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
  cfg = tiny_config(dir);
  cfg.grid_rows = 1;
  cfg.grid_cols = 1;
  CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
}
