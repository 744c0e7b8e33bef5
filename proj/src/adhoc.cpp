#include "platoon/adhoc.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <queue>
#include <tuple>

#include "platoon/model.hpp"
#include "platoon/network.hpp"

namespace platoon {

namespace {

void validate_fd(const FundamentalDiagram& fd) {
  if (fd.free_flow_speed_kmh <= Rational(0)) throw ValidationError("free-flow speed must be positive");
  if (fd.shockwave_speed_kmh <= Rational(0)) throw ValidationError("shockwave speed must be positive");
  if (fd.jam_density_veh_km <= Rational(0)) throw ValidationError("jam density must be positive");
  if (fd.base_capacity_veh_h <= Rational(0)) throw ValidationError("base capacity must be positive");
}

}  // namespace

void validate_factor_table(const CapacityFactorTable& table) {
  if (table.rows.empty()) throw ValidationError("capacity factor table is empty");
  if (table.rows.front().first != Rational(0) || table.rows.front().second != Rational(1)) {
    throw ValidationError("capacity factor table must start at (0, 1)");
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& [share, mult] = table.rows[i];
    if (share < Rational(0) || share > Rational(1)) {
      throw ValidationError("capacity factor share outside [0, 1]");
    }
    if (i > 0) {
      if (share <= table.rows[i - 1].first) {
        throw ValidationError("capacity factor shares must be strictly increasing");
      }
      if (mult < table.rows[i - 1].second) {
        throw ValidationError("capacity factor multipliers must be nondecreasing");
      }
    }
  }
}

namespace {

// Interpolated crossing time at count q; nullopt below the first record,
// clamped to the newest record beyond the last.
std::optional<Rational> curve_time(const std::vector<CountRecord>& recs, const Rational& q) {
  if (recs.empty() || q < recs.front().vehicle) return std::nullopt;
  if (q >= recs.back().vehicle) return recs.back().time_min;
  auto hi = std::upper_bound(recs.begin(), recs.end(), q,
                             [](const Rational& a, const CountRecord& r) { return a < r.vehicle; });
  auto lo = hi - 1;
  if (lo->vehicle == q) return lo->time_min;
  return lo->time_min +
         (hi->time_min - lo->time_min) * (q - lo->vehicle) / (hi->vehicle - lo->vehicle);
}

void append_record(std::vector<CountRecord>& recs, const Rational& vehicle,
                   const Rational& time_min, const char* what) {
  if (!recs.empty()) {
    if (vehicle <= recs.back().vehicle) {
      throw ValidationError(std::string(what) + " records need increasing vehicle counts");
    }
    if (time_min < recs.back().time_min) {
      throw ValidationError(std::string(what) + " times must be nondecreasing");
    }
  }
  recs.push_back(CountRecord{vehicle, time_min});
}

}  // namespace

void LinkState::record_entry(const Rational& vehicle, const Rational& time_min) {
  append_record(entries, vehicle, time_min, "entry");
}

void LinkState::record_exit(const Rational& vehicle, const Rational& time_min) {
  if (exits.size() >= entries.size()) throw ValidationError("more exit records than entries");
  append_record(exits, vehicle, time_min, "exit");
}

Rational adjust_capacity(const FundamentalDiagram& fd, const Rational& platoon_share,
                         const CapacityFactorTable& table) {
  validate_fd(fd);
  validate_factor_table(table);
  if (platoon_share < Rational(0) || platoon_share > Rational(1)) {
    throw ValidationError("platoon share outside [0, 1]");
  }
  const auto& rows = table.rows;
  Rational mult = rows.back().second;  // constant past the last row
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (platoon_share <= rows[i].first) {
      const auto& [s0, m0] = rows[i - 1];
      const auto& [s1, m1] = rows[i];
      mult = m0 + (m1 - m0) * (platoon_share - s0) / (s1 - s0);
      break;
    }
  }
  return fd.base_capacity_veh_h * mult;
}

Rational newell_crossing_time(const LinkState& link, const FundamentalDiagram& fd,
                              const Rational& x_km, const Rational& n) {
  validate_fd(fd);
  if (x_km < Rational(0) || x_km > link.length_km) {
    throw ValidationError("crossing position outside the link");
  }
  auto entered = curve_time(link.entries, n);
  if (!entered || (!link.entries.empty() && n > link.entries.back().vehicle)) {
    throw ValidationError("vehicle has not entered the link");
  }
  Rational t = *entered + Rational(60) * x_km / fd.free_flow_speed_kmh;

  const Rational remaining = link.length_km - x_km;
  auto wave = curve_time(link.exits, n - fd.jam_density_veh_km * remaining);
  if (wave) {
    Rational congested = *wave + Rational(60) * remaining / fd.shockwave_speed_kmh;
    t = std::max(t, congested);
  }
  return t;
}

Plan simulate_opportunistic(const Instance& inst, const AdhocConfig& cfg,
                            std::vector<LinkState>* link_states) {
  validate_instance(inst);
  if (cfg.headway_delta < Rational(0)) throw ValidationError("headway window must be nonnegative");
  validate_factor_table(cfg.factors);
  const RoadNetwork& net = inst.net();
  for (const Edge& e : net.edges()) validate_fd(e.fd);

  // Everyone takes the cheapest deadline-feasible route; same fallback rule
  // as the solver's baseline so the two baselines are one plan.
  std::vector<VehiclePlan> vehicles;
  for (const Vehicle& v : inst.vehicles) {
    Path sp = shortest_path(net, v.origin, v.dest);
    if (v.earliest_departure + sp.total_time > v.deadline) {
      const Rational budget = sp.total_cost / (Rational(1) - inst.eta);
      std::optional<Path> pick;
      for (Path& p : bounded_paths(net, v.origin, v.dest, budget)) {
        if (v.earliest_departure + p.total_time <= v.deadline) {
          pick = std::move(p);
          break;  // bounded_paths sorts by cost, then node order
        }
      }
      if (!pick) {
        throw ValidationError("vehicle " + std::to_string(v.id) +
                              ": no admissible route within detour budget and deadline");
      }
      sp = std::move(*pick);
    }
    VehiclePlan vp;
    vp.vehicle_id = v.id;
    vp.route_edges = sp.edge_indices;
    vehicles.push_back(std::move(vp));
  }

  std::vector<LinkState> links(net.edge_count());
  std::vector<std::vector<int>> entrant_ids(net.edge_count());
  std::vector<std::optional<Rational>> last_capable(net.edge_count());
  std::vector<int> run_members(net.edge_count(), 0);
  for (std::size_t e = 0; e < links.size(); ++e) {
    links[e].length_km = net.edge(e).length_km();
    links[e].effective_capacity_veh_h = net.edge(e).fd.base_capacity_veh_h;
  }

  // Chronological sweep; ties resolve by instance order, then leg.
  using Event = std::tuple<Rational, std::size_t, std::size_t>;  // time, vehicle, leg
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;
  for (std::size_t i = 0; i < inst.vehicles.size(); ++i) {
    queue.emplace(inst.vehicles[i].earliest_departure, i, 0);
  }
  while (!queue.empty()) {
    auto [t, i, leg] = queue.top();
    queue.pop();
    VehiclePlan& vp = vehicles[i];
    if (leg == vp.route_edges.size()) continue;  // trip complete
    const int e = vp.route_edges[leg];
    const Edge& edge = net.edge(e);
    LinkState& link = links[e];

    const int n = static_cast<int>(link.entries.size());
    link.record_entry(Rational(n), t);
    entrant_ids[e].push_back(vp.vehicle_id);
    vp.entry_times.push_back(t);

    if (inst.vehicles[i].platoon_capable) {
      if (last_capable[e] && t - *last_capable[e] <= cfg.headway_delta &&
          !link.platoon_runs.empty()) {
        auto& run = link.platoon_runs.back();
        run.push_back(vp.vehicle_id);
        run_members[e] += run.size() == 2 ? 2 : 1;
      } else {
        link.platoon_runs.push_back({vp.vehicle_id});
      }
      last_capable[e] = t;
    }
    link.effective_capacity_veh_h =
        adjust_capacity(edge.fd, Rational(run_members[e]) / Rational(n + 1), cfg.factors);

    Rational exit_t = t + edge.time_min;
    if (cfg.congestion && !link.exits.empty()) {
      // finite capacity: the link discharges one vehicle per headway
      exit_t = std::max(
          exit_t, link.exits.back().time_min + Rational(60) / link.effective_capacity_veh_h);
    }
    link.record_exit(Rational(n), exit_t);
    queue.emplace(exit_t, i, leg + 1);
  }

  Plan plan;
  plan.status = SolveStatus::opportunistic;
  if (cfg.headway_delta == Rational(0)) {
    plan.platoons = derive_platoon_groups(inst, vehicles);
    plan.objective = compute_plan_objective(inst, vehicles);
  } else {
    // run-based accounting: followers of each run ride discounted
    Rational total;
    for (const VehiclePlan& vp : vehicles) {
      for (int ei : vp.route_edges) total += net.edge(ei).cost;
    }
    for (std::size_t e = 0; e < links.size(); ++e) {
      for (const auto& run : links[e].platoon_runs) {
        if (run.size() < 2) continue;
        PlatoonGroup g;
        g.edge_index = static_cast<int>(e);
        g.vehicle_ids = run;
        std::sort(g.vehicle_ids.begin(), g.vehicle_ids.end());
        for (const VehiclePlan& vp : vehicles) {
          if (vp.vehicle_id != run.front()) continue;
          for (std::size_t k = 0; k < vp.route_edges.size(); ++k) {
            if (vp.route_edges[k] == static_cast<int>(e)) g.entry_time = vp.entry_times[k];
          }
        }
        total -= inst.eta * net.edge(e).cost * Rational(static_cast<int>(run.size()) - 1);
        plan.platoons.push_back(std::move(g));
      }
    }
    std::sort(plan.platoons.begin(), plan.platoons.end(), [](const auto& a, const auto& b) {
      return std::tie(a.edge_index, a.entry_time) < std::tie(b.edge_index, b.entry_time);
    });
    plan.objective = total;
  }
  plan.vehicles = std::move(vehicles);

  // Free-flow exact-coincidence plans honor the coordination model; check it.
  if (!cfg.congestion && cfg.headway_delta == Rational(0)) {
    CoordinationModel model = CoordinationModel::build(inst);
    Assignment a = assignment_from_plan(model, plan);
    if (!check_feasibility(model, a).empty()) {
      throw std::logic_error("opportunistic plan failed the feasibility audit");
    }
    if (objective_value(model, a) != plan.objective) {
      throw std::logic_error("opportunistic plan objective mismatch");
    }
  }
  if (link_states) *link_states = std::move(links);
  return plan;
}

}  // namespace platoon
