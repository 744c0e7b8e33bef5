#include "platoon/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "platoon/adhoc.hpp"
#include "platoon/io.hpp"

namespace fs = std::filesystem;

namespace platoon {

namespace {

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.grid_rows < 1 || cfg.grid_cols < 1 || cfg.grid_rows * cfg.grid_cols < 2) {
    throw ValidationError("grid needs at least two nodes");
  }
  if (cfg.n_vehicles < 1) throw ValidationError("need at least one vehicle");
  if (cfg.departure_stddevs.empty()) throw ValidationError("empty departure stddev list");
  for (double s : cfg.departure_stddevs) {
    if (s < 0) throw ValidationError("negative departure stddev");
  }
  if (cfg.max_waits.empty()) throw ValidationError("empty wait budget list");
  for (const Rational& p : cfg.max_waits) {
    if (p < Rational(0)) throw ValidationError("negative wait budget");
  }
  if (cfg.seeds.empty()) throw ValidationError("empty seed list");
  if (cfg.workers < 1) throw ValidationError("need at least one worker");
  if (cfg.output_dir.empty()) throw ValidationError("empty output directory");
}

std::string sigma_label(double sigma) {
  std::ostringstream os;
  os << sigma;
  return os.str();
}

std::string path_safe(std::string s) {
  for (char& c : s) {
    if (c == '/') c = '-';
  }
  return s;
}

std::string scenario_name(double sigma, const Rational& p) {
  return "sigma" + path_safe(sigma_label(sigma)) + "_p" + path_safe(p.str());
}

struct RunOutput {
  bool ok = false;
  std::string status;
  std::string error;
  MetricsReport coordinated;
  MetricsReport opportunistic;
};

RunOutput execute_run(const ExperimentConfig& cfg,
                      const std::shared_ptr<const RoadNetwork>& net, double sigma,
                      const Rational& p, std::uint64_t seed, const fs::path& dir) {
  RunOutput out;
  try {
    DepartureDistribution dist = cfg.departure;
    dist.stddev = sigma;
    Instance inst = generate_case_study(net, cfg.n_vehicles, dist, p, seed, cfg.eta,
                                        cfg.wait_cost_rate, cfg.solver.resolution);
    save_json_file((dir / "instance.json").string(), instance_json(inst));

    Plan opportunistic = simulate_opportunistic(inst);
    save_json_file((dir / "opportunistic.json").string(), plan_json(opportunistic));
    out.opportunistic = compute_metrics(inst, opportunistic, cfg.econ);
    save_json_file((dir / "opportunistic_metrics.json").string(),
                   metrics_json(out.opportunistic));
    std::ostringstream ocsv;
    write_metrics_csv(ocsv, out.opportunistic);
    save_text_file((dir / "opportunistic_metrics.csv").string(), ocsv.str());

    Plan coordinated = solve(inst, cfg.solver);
    save_json_file((dir / "coordinated.json").string(), plan_json(coordinated));
    out.coordinated = compute_metrics(inst, coordinated, cfg.econ);
    save_json_file((dir / "coordinated_metrics.json").string(), metrics_json(out.coordinated));
    std::ostringstream ccsv;
    write_metrics_csv(ccsv, out.coordinated);
    save_text_file((dir / "coordinated_metrics.csv").string(), ccsv.str());

    out.status = to_string(coordinated.status);
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
    save_text_file((dir / "error.txt").string(), out.error + "\n");
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const fs::path root(cfg.output_dir);
  fs::create_directories(root);

  struct Task {
    std::size_t scenario;
    double sigma;
    Rational p;
    std::uint64_t seed;
    fs::path dir;
  };
  std::vector<Task> tasks;
  std::vector<ScenarioResult> scenarios;
  for (double sigma : cfg.departure_stddevs) {
    for (const Rational& p : cfg.max_waits) {
      ScenarioResult sc;
      sc.sigma = sigma;
      sc.p = p;
      for (std::uint64_t seed : cfg.seeds) {
        fs::path dir = root / scenario_name(sigma, p) / ("seed" + std::to_string(seed));
        fs::create_directories(dir);
        tasks.push_back(Task{scenarios.size(), sigma, p, seed, dir});
      }
      scenarios.push_back(std::move(sc));
    }
  }

  auto net = std::make_shared<const RoadNetwork>(
      make_grid(cfg.grid_rows, cfg.grid_cols, Rational(1), Rational(1)));
  std::vector<RunOutput> outputs(tasks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.workers) if (cfg.workers > 1)
#endif
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    outputs[t] = execute_run(cfg, net, tasks[t].sigma, tasks[t].p, tasks[t].seed, tasks[t].dir);
  }

  ExperimentResult result;
  result.output_dir = cfg.output_dir;
  std::vector<LabeledReport> labeled;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    ScenarioResult& sc = scenarios[tasks[t].scenario];
    const RunOutput& out = outputs[t];
    sc.statuses.push_back(out.ok ? out.status : "error");
    sc.errors.push_back(out.error);
    if (!out.ok) {
      ++result.failed_runs;
      continue;
    }
    ++sc.completed;
    sc.coordinated_mean_vmt_ratio += out.coordinated.mean_vmt_ratio;
    sc.coordinated_mean_wait += out.coordinated.mean_wait_min;
    sc.opportunistic_mean_vmt_ratio += out.opportunistic.mean_vmt_ratio;
    sc.opportunistic_mean_wait += out.opportunistic.mean_wait_min;
    labeled.push_back(LabeledReport{tasks[t].sigma, tasks[t].p, "coordinated", tasks[t].seed,
                                    out.coordinated});
    labeled.push_back(LabeledReport{tasks[t].sigma, tasks[t].p, "opportunistic", tasks[t].seed,
                                    out.opportunistic});
  }
  for (ScenarioResult& sc : scenarios) {
    if (sc.completed > 0) {
      const Rational n(sc.completed);
      sc.coordinated_mean_vmt_ratio /= n;
      sc.coordinated_mean_wait /= n;
      sc.opportunistic_mean_vmt_ratio /= n;
      sc.opportunistic_mean_wait /= n;
    }
  }

  std::ostringstream csv;
  csv << "sigma,p,seeds,completed,coordinated_mean_vmt_ratio,coordinated_mean_wait_min,"
         "opportunistic_mean_vmt_ratio,opportunistic_mean_wait_min,statuses\n";
  for (const ScenarioResult& sc : scenarios) {
    csv << sigma_label(sc.sigma) << ',' << sc.p.str() << ',' << cfg.seeds.size() << ','
        << sc.completed << ',';
    if (sc.completed > 0) {
      csv << sc.coordinated_mean_vmt_ratio.str() << ',' << sc.coordinated_mean_wait.str() << ','
          << sc.opportunistic_mean_vmt_ratio.str() << ',' << sc.opportunistic_mean_wait.str();
    } else {
      csv << ",,,";
    }
    csv << ',';
    for (std::size_t k = 0; k < sc.statuses.size(); ++k) {
      if (k) csv << '|';
      csv << sc.statuses[k];
    }
    csv << '\n';
  }
  save_text_file((root / "summary.csv").string(), csv.str());
  if (!labeled.empty()) emit_plot_data(cfg.output_dir, labeled);

  result.scenarios = std::move(scenarios);
  return result;
}

void emit_plot_data(const std::string& dir, const std::vector<LabeledReport>& reports) {
  if (reports.empty()) throw ValidationError("no reports to plot");
  const fs::path root(dir);
  fs::create_directories(root);
  auto emit = [&](const char* file, const char* column, auto select) {
    std::ostringstream csv;
    csv << "sigma,p,kind,seed,vehicle," << column << '\n';
    for (const LabeledReport& lr : reports) {
      for (const VehicleMetrics& row : lr.report.vehicles) {
        csv << sigma_label(lr.sigma) << ',' << lr.p.str() << ',' << lr.kind << ',' << lr.seed
            << ',' << row.vehicle_id << ',' << select(row).str() << '\n';
      }
    }
    save_text_file((root / file).string(), csv.str());
  };
  emit("fig3a_wait.csv", "wait_min", [](const VehicleMetrics& r) { return r.wait_min; });
  emit("fig3b_vmt_ratio.csv", "vmt_ratio", [](const VehicleMetrics& r) { return r.vmt_ratio; });
  emit("fig4b_savings.csv", "savings_usd", [](const VehicleMetrics& r) { return r.savings_usd; });
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.grid_rows = j.value("grid_rows", cfg.grid_rows);
  cfg.grid_cols = j.value("grid_cols", cfg.grid_cols);
  cfg.n_vehicles = j.value("n_vehicles", cfg.n_vehicles);
  if (j.contains("departure_stddevs")) {
    cfg.departure_stddevs = j.at("departure_stddevs").get<std::vector<double>>();
  }
  if (j.contains("max_waits")) {
    cfg.max_waits.clear();
    for (const auto& p : j.at("max_waits")) cfg.max_waits.push_back(rational_from_json(p));
  }
  if (j.contains("departure")) {
    const auto& d = j.at("departure");
    if (d.contains("low")) cfg.departure.low = rational_from_json(d.at("low"));
    if (d.contains("high")) cfg.departure.high = rational_from_json(d.at("high"));
    cfg.departure.mean = d.value("mean", cfg.departure.mean);
  }
  if (j.contains("eta")) cfg.eta = rational_from_json(j.at("eta"));
  if (j.contains("wait_cost_rate")) cfg.wait_cost_rate = rational_from_json(j.at("wait_cost_rate"));
  if (j.contains("econ")) {
    const auto& e = j.at("econ");
    if (e.contains("eta")) cfg.econ.eta = rational_from_json(e.at("eta"));
    if (e.contains("fuel_consumption_gal_mi")) {
      cfg.econ.fuel_consumption_gal_mi = rational_from_json(e.at("fuel_consumption_gal_mi"));
    }
    if (e.contains("fuel_cost_usd_gal")) {
      cfg.econ.fuel_cost_usd_gal = rational_from_json(e.at("fuel_cost_usd_gal"));
    }
    if (e.contains("value_of_time_usd_h")) {
      cfg.econ.value_of_time_usd_h = rational_from_json(e.at("value_of_time_usd_h"));
    }
    if (e.contains("miles_per_km")) cfg.econ.miles_per_km = rational_from_json(e.at("miles_per_km"));
  }
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("mode")) {
      const std::string mode = s.at("mode").get<std::string>();
      if (mode == "exact") {
        cfg.solver.mode = SolverConfig::Mode::exact;
      } else if (mode == "heuristic") {
        cfg.solver.mode = SolverConfig::Mode::heuristic;
      } else if (mode == "oracle") {
        cfg.solver.mode = SolverConfig::Mode::oracle;
      } else {
        throw ValidationError("unknown solver mode: " + mode);
      }
    }
    cfg.solver.time_limit_s = s.value("time_limit_s", cfg.solver.time_limit_s);
    if (s.contains("resolution")) cfg.solver.resolution = rational_from_json(s.at("resolution"));
    cfg.solver.threads = s.value("threads", cfg.solver.threads);
    cfg.solver.route_cap = s.value("route_cap", cfg.solver.route_cap);
  }
  cfg.workers = j.value("workers", cfg.workers);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  return cfg;
}

nlohmann::json experiment_config_json(const ExperimentConfig& cfg) {
  const char* mode = cfg.solver.mode == SolverConfig::Mode::exact       ? "exact"
                     : cfg.solver.mode == SolverConfig::Mode::heuristic ? "heuristic"
                                                                        : "oracle";
  nlohmann::json waits = nlohmann::json::array();
  for (const Rational& p : cfg.max_waits) waits.push_back(rational_json(p));
  return {{"grid_rows", cfg.grid_rows},
          {"grid_cols", cfg.grid_cols},
          {"n_vehicles", cfg.n_vehicles},
          {"departure_stddevs", cfg.departure_stddevs},
          {"max_waits", std::move(waits)},
          {"departure",
           {{"low", rational_json(cfg.departure.low)},
            {"high", rational_json(cfg.departure.high)},
            {"mean", cfg.departure.mean}}},
          {"eta", rational_json(cfg.eta)},
          {"wait_cost_rate", rational_json(cfg.wait_cost_rate)},
          {"econ",
           {{"eta", rational_json(cfg.econ.eta)},
            {"fuel_consumption_gal_mi", rational_json(cfg.econ.fuel_consumption_gal_mi)},
            {"fuel_cost_usd_gal", rational_json(cfg.econ.fuel_cost_usd_gal)},
            {"value_of_time_usd_h", rational_json(cfg.econ.value_of_time_usd_h)},
            {"miles_per_km", rational_json(cfg.econ.miles_per_km)}}},
          {"seeds", cfg.seeds},
          {"solver",
           {{"mode", mode},
            {"time_limit_s", cfg.solver.time_limit_s},
            {"resolution", rational_json(cfg.solver.resolution)},
            {"threads", cfg.solver.threads},
            {"route_cap", cfg.solver.route_cap}}},
          {"workers", cfg.workers},
          {"output_dir", cfg.output_dir}};
}

}  // namespace platoon
