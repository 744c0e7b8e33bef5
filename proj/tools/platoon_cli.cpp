// Command-line front end: generate / solve / simulate / metrics / animate /
// experiment, all operating on the JSON documents defined in platoon/io.hpp.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "platoon/adhoc.hpp"
#include "platoon/experiment.hpp"
#include "platoon/io.hpp"

using namespace platoon;

namespace {

Rational parse_rational(const std::string& s, const std::string& flag) {
  try {
    return Rational::parse(s);
  } catch (const std::exception& e) {
    throw CLI::ValidationError(flag, e.what());
  }
}

std::vector<Rational> parse_rationals(const std::vector<std::string>& in,
                                      const std::string& flag) {
  std::vector<Rational> out;
  out.reserve(in.size());
  for (const std::string& s : in) out.push_back(parse_rational(s, flag));
  return out;
}

void print_plan(const Plan& plan) {
  std::cout << "status: " << to_string(plan.status) << '\n'
            << "objective: " << plan.objective.str() << '\n'
            << "platoons: " << plan.platoons.size() << '\n';
}

struct GenerateArgs {
  int rows = 10, cols = 10, vehicles = 12;
  std::string max_wait = "10", eta = "1/10", wait_cost_rate = "0", resolution = "1";
  std::string low = "0", high = "100", edge_cost = "1", edge_time = "1";
  double mean = 50.0, sigma = 10.0;
  std::uint64_t seed = 1;
  std::string out = "instance.json";
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  CLI::App* cmd = app.add_subcommand("generate", "sample a random grid instance");
  cmd->add_option("--rows", a.rows, "grid rows");
  cmd->add_option("--cols", a.cols, "grid columns");
  cmd->add_option("--vehicles", a.vehicles, "number of vehicles");
  cmd->add_option("--max-wait", a.max_wait, "wait budget p, minutes");
  cmd->add_option("--eta", a.eta, "platooning fuel-saving fraction");
  cmd->add_option("--wait-cost-rate", a.wait_cost_rate, "cost per minute of waiting");
  cmd->add_option("--resolution", a.resolution, "departure-time grid step, minutes");
  cmd->add_option("--sigma", a.sigma, "departure-time stddev, minutes");
  cmd->add_option("--mean", a.mean, "departure-time mean, minutes");
  cmd->add_option("--low", a.low, "earliest sampled departure");
  cmd->add_option("--high", a.high, "latest sampled departure");
  cmd->add_option("--edge-cost", a.edge_cost, "grid edge fuel cost");
  cmd->add_option("--edge-time", a.edge_time, "grid edge traversal time, minutes");
  cmd->add_option("--seed", a.seed, "random seed");
  cmd->add_option("-o,--output", a.out, "instance file to write");
  cmd->callback([&a] {
    auto net = std::make_shared<const RoadNetwork>(
        make_grid(a.rows, a.cols, parse_rational(a.edge_cost, "--edge-cost"),
                  parse_rational(a.edge_time, "--edge-time")));
    DepartureDistribution dist;
    dist.low = parse_rational(a.low, "--low");
    dist.high = parse_rational(a.high, "--high");
    dist.mean = a.mean;
    dist.stddev = a.sigma;
    const Instance inst = generate_case_study(
        net, a.vehicles, dist, parse_rational(a.max_wait, "--max-wait"), a.seed,
        parse_rational(a.eta, "--eta"), parse_rational(a.wait_cost_rate, "--wait-cost-rate"),
        parse_rational(a.resolution, "--resolution"));
    save_json_file(a.out, instance_json(inst));
    std::cout << "wrote " << a.out << " (" << inst.vehicles.size() << " vehicles)\n";
  });
}

struct SolveArgs {
  std::string input = "instance.json", out, mode = "exact", resolution;
  double time_limit = 300.0;
  int threads = 1;
  std::size_t route_cap = 2000;
};

void add_solve(CLI::App& app, SolveArgs& a) {
  CLI::App* cmd = app.add_subcommand("solve", "coordinate routes and departures");
  cmd->add_option("-i,--input", a.input, "instance file");
  cmd->add_option("--mode", a.mode, "exact | heuristic | oracle")
      ->check(CLI::IsMember({"exact", "heuristic", "oracle"}));
  cmd->add_option("--time-limit", a.time_limit, "budget for the exact search, seconds");
  cmd->add_option("--threads", a.threads, "exact-search workers");
  cmd->add_option("--route-cap", a.route_cap, "per-vehicle route menu cap (0 = unlimited)");
  cmd->add_option("--resolution", a.resolution, "override the instance delay grid step");
  cmd->add_option("-o,--output", a.out, "plan file to write");
  cmd->callback([&a] {
    const Instance inst = instance_from_json(load_json_file(a.input));
    SolverConfig cfg;
    cfg.mode = a.mode == "exact"       ? SolverConfig::Mode::exact
               : a.mode == "heuristic" ? SolverConfig::Mode::heuristic
                                       : SolverConfig::Mode::oracle;
    cfg.time_limit_s = a.time_limit;
    cfg.threads = a.threads;
    cfg.route_cap = a.route_cap;
    if (!a.resolution.empty()) cfg.resolution = parse_rational(a.resolution, "--resolution");
    const Plan plan = solve(inst, cfg);
    print_plan(plan);
    if (!a.out.empty()) save_json_file(a.out, plan_json(plan));
  });
}

struct SimulateArgs {
  std::string input = "instance.json", out, delta = "0", factor_table;
  bool congestion = false;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  CLI::App* cmd = app.add_subcommand("simulate", "uncoordinated ad hoc platooning baseline");
  cmd->add_option("-i,--input", a.input, "instance file");
  cmd->add_option("--delta", a.delta, "run-joining headway, minutes");
  cmd->add_flag("--congestion", a.congestion, "apply capacity discharge headways");
  cmd->add_option("--factor-table", a.factor_table, "capacity factor table file");
  cmd->add_option("-o,--output", a.out, "plan file to write");
  cmd->callback([&a] {
    const Instance inst = instance_from_json(load_json_file(a.input));
    AdhocConfig cfg;
    cfg.headway_delta = parse_rational(a.delta, "--delta");
    cfg.congestion = a.congestion;
    if (!a.factor_table.empty()) {
      std::ifstream in(a.factor_table);
      if (!in.good()) throw ValidationError("cannot open " + a.factor_table);
      cfg.factors = load_factor_table(in);
    }
    const Plan plan = simulate_opportunistic(inst, cfg);
    print_plan(plan);
    if (!a.out.empty()) save_json_file(a.out, plan_json(plan));
  });
}

struct MetricsArgs {
  std::string input = "instance.json", plan = "plan.json", csv, json;
  std::string eta, fuel_consumption, fuel_cost, value_of_time, miles_per_km;
};

void add_metrics(CLI::App& app, MetricsArgs& a) {
  CLI::App* cmd = app.add_subcommand("metrics", "per-vehicle VMT ratios, waits, savings");
  cmd->add_option("-i,--input", a.input, "instance file");
  cmd->add_option("-p,--plan", a.plan, "plan file");
  cmd->add_option("--econ-eta", a.eta, "follower fuel-saving fraction");
  cmd->add_option("--fuel-consumption", a.fuel_consumption, "gallons per mile");
  cmd->add_option("--fuel-cost", a.fuel_cost, "dollars per gallon");
  cmd->add_option("--value-of-time", a.value_of_time, "dollars per hour");
  cmd->add_option("--miles-per-km", a.miles_per_km, "unit conversion factor");
  cmd->add_option("--csv", a.csv, "write the table to this file instead of stdout");
  cmd->add_option("--json", a.json, "also write the full report as JSON");
  cmd->callback([&a] {
    const Instance inst = instance_from_json(load_json_file(a.input));
    const Plan plan = plan_from_json(load_json_file(a.plan));
    EconomicParams econ;
    if (!a.eta.empty()) econ.eta = parse_rational(a.eta, "--econ-eta");
    if (!a.fuel_consumption.empty()) {
      econ.fuel_consumption_gal_mi = parse_rational(a.fuel_consumption, "--fuel-consumption");
    }
    if (!a.fuel_cost.empty()) econ.fuel_cost_usd_gal = parse_rational(a.fuel_cost, "--fuel-cost");
    if (!a.value_of_time.empty()) {
      econ.value_of_time_usd_h = parse_rational(a.value_of_time, "--value-of-time");
    }
    if (!a.miles_per_km.empty()) econ.miles_per_km = parse_rational(a.miles_per_km, "--miles-per-km");
    const MetricsReport report = compute_metrics(inst, plan, econ);
    if (a.csv.empty()) {
      write_metrics_csv(std::cout, report);
    } else {
      std::ostringstream os;
      write_metrics_csv(os, report);
      save_text_file(a.csv, os.str());
    }
    if (!a.json.empty()) save_json_file(a.json, metrics_json(report));
  });
}

struct AnimateArgs {
  std::string input = "instance.json", plan = "plan.json", out = "timeline.json";
  std::string interval = "1";
};

void add_animate(CLI::App& app, AnimateArgs& a) {
  CLI::App* cmd = app.add_subcommand("animate", "fixed-interval position timeline for a plan");
  cmd->add_option("-i,--input", a.input, "instance file");
  cmd->add_option("-p,--plan", a.plan, "plan file");
  cmd->add_option("--interval", a.interval, "sampling interval, minutes");
  cmd->add_option("-o,--output", a.out, "timeline file to write");
  cmd->callback([&a] {
    const Instance inst = instance_from_json(load_json_file(a.input));
    const Plan plan = plan_from_json(load_json_file(a.plan));
    const AnimationTimeline timeline =
        make_timeline(*inst.network, plan, parse_rational(a.interval, "--interval"));
    save_json_file(a.out, timeline_json(timeline));
    std::cout << "wrote " << a.out << " (" << timeline.frames.size() << " frames)\n";
  });
}

struct ExperimentArgs {
  std::string config;
  int rows = 0, cols = 0, vehicles = 0, workers = 0, threads = -1;
  std::vector<double> sigmas;
  std::vector<std::string> max_waits;
  std::vector<std::uint64_t> seeds;
  std::string eta, wait_cost_rate, mode, resolution, output_dir;
  double time_limit = -1.0;
  bool dry_run = false;
};

int run_experiment_cmd(const CLI::App* cmd, const ExperimentArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = experiment_config_from_json(load_json_file(a.config));
  if (cmd->count("--rows")) cfg.grid_rows = a.rows;
  if (cmd->count("--cols")) cfg.grid_cols = a.cols;
  if (cmd->count("--vehicles")) cfg.n_vehicles = a.vehicles;
  if (cmd->count("--sigmas")) cfg.departure_stddevs = a.sigmas;
  if (cmd->count("--max-waits")) cfg.max_waits = parse_rationals(a.max_waits, "--max-waits");
  if (cmd->count("--seeds")) cfg.seeds = a.seeds;
  if (cmd->count("--eta")) cfg.eta = parse_rational(a.eta, "--eta");
  if (cmd->count("--wait-cost-rate")) {
    cfg.wait_cost_rate = parse_rational(a.wait_cost_rate, "--wait-cost-rate");
  }
  if (cmd->count("--mode")) {
    cfg.solver.mode = a.mode == "exact"       ? SolverConfig::Mode::exact
                      : a.mode == "heuristic" ? SolverConfig::Mode::heuristic
                                              : SolverConfig::Mode::oracle;
  }
  if (cmd->count("--time-limit")) cfg.solver.time_limit_s = a.time_limit;
  if (cmd->count("--threads")) cfg.solver.threads = a.threads;
  if (cmd->count("--resolution")) cfg.solver.resolution = parse_rational(a.resolution, "--resolution");
  if (cmd->count("--workers")) cfg.workers = a.workers;
  if (cmd->count("--output-dir")) cfg.output_dir = a.output_dir;

  if (a.dry_run) {
    std::cout << experiment_config_json(cfg).dump(2) << '\n';
    return 0;
  }
  const ExperimentResult result = run_experiment(cfg);
  std::cout << "sigma,p,coordinated_mean_vmt_ratio,coordinated_mean_wait_min,"
               "opportunistic_mean_vmt_ratio,opportunistic_mean_wait_min,completed\n";
  for (const ScenarioResult& sc : result.scenarios) {
    std::cout << sc.sigma << ',' << sc.p.str() << ',';
    if (sc.completed > 0) {
      std::cout << sc.coordinated_mean_vmt_ratio.str() << ',' << sc.coordinated_mean_wait.str()
                << ',' << sc.opportunistic_mean_vmt_ratio.str() << ','
                << sc.opportunistic_mean_wait.str();
    } else {
      std::cout << ",,,";
    }
    std::cout << ',' << sc.completed << '/' << (sc.completed ? sc.statuses.size() : sc.errors.size())
              << '\n';
  }
  if (result.failed_runs > 0) {
    std::cerr << result.failed_runs << " run(s) failed; see error.txt files under "
              << result.output_dir << '\n';
    return 1;
  }
  std::cout << "results in " << result.output_dir << '\n';
  return 0;
}

CLI::App* add_experiment(CLI::App& app, ExperimentArgs& a) {
  CLI::App* cmd = app.add_subcommand("experiment", "full sweep: generate, solve, simulate, report");
  cmd->add_option("--config", a.config, "JSON config file (flags override its fields)");
  cmd->add_option("--rows", a.rows, "grid rows");
  cmd->add_option("--cols", a.cols, "grid columns");
  cmd->add_option("--vehicles", a.vehicles, "vehicles per instance");
  cmd->add_option("--sigmas", a.sigmas, "departure stddev list")->delimiter(',');
  cmd->add_option("--max-waits", a.max_waits, "wait budget list")->delimiter(',');
  cmd->add_option("--seeds", a.seeds, "seed list")->delimiter(',');
  cmd->add_option("--eta", a.eta, "platooning fuel-saving fraction");
  cmd->add_option("--wait-cost-rate", a.wait_cost_rate, "cost per minute of waiting");
  cmd->add_option("--mode", a.mode, "solver mode")
      ->check(CLI::IsMember({"exact", "heuristic", "oracle"}));
  cmd->add_option("--time-limit", a.time_limit, "solver budget per run, seconds");
  cmd->add_option("--threads", a.threads, "solver threads per run");
  cmd->add_option("--resolution", a.resolution, "delay grid step, minutes");
  cmd->add_option("--workers", a.workers, "concurrent runs");
  cmd->add_option("--output-dir", a.output_dir, "directory for all artifacts");
  cmd->add_flag("--dry-run", a.dry_run, "print the effective config as JSON and exit");
  return cmd;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordinated truck platooning toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  SolveArgs sol;
  SimulateArgs sim;
  MetricsArgs met;
  AnimateArgs ani;
  ExperimentArgs exp;
  add_generate(app, gen);
  add_solve(app, sol);
  add_simulate(app, sim);
  add_metrics(app, met);
  add_animate(app, ani);
  CLI::App* exp_cmd = add_experiment(app, exp);

  try {
    app.parse(argc, argv);
    if (exp_cmd->parsed()) return run_experiment_cmd(exp_cmd, exp);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
