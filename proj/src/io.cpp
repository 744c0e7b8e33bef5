#include "platoon/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace platoon {

using nlohmann::json;

json rational_json(const Rational& r) {
  if (r.den() == 1) return json(r.num());
  return json(r.str());
}

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number_float()) return Rational::parse(j.dump());  // shortest decimal form
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  throw ValidationError("expected a number or rational string, got " + j.dump());
}

json network_json(const RoadNetwork& net) {
  json edges = json::array();
  for (const Edge& e : net.edges()) {
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"cost", rational_json(e.cost)},
                     {"time_min", rational_json(e.time_min)},
                     {"fd",
                      {{"free_flow_speed_kmh", rational_json(e.fd.free_flow_speed_kmh)},
                       {"shockwave_speed_kmh", rational_json(e.fd.shockwave_speed_kmh)},
                       {"jam_density_veh_km", rational_json(e.fd.jam_density_veh_km)},
                       {"base_capacity_veh_h", rational_json(e.fd.base_capacity_veh_h)}}}});
  }
  return {{"nodes", net.nodes()}, {"edges", std::move(edges)}};
}

RoadNetwork network_from_json(const json& j) {
  std::vector<NodeId> nodes;
  for (const json& n : j.at("nodes")) nodes.push_back(n.get<NodeId>());
  std::vector<Edge> edges;
  for (const json& je : j.at("edges")) {
    Edge e;
    e.from = je.at("from").get<NodeId>();
    e.to = je.at("to").get<NodeId>();
    e.cost = rational_from_json(je.at("cost"));
    e.time_min = rational_from_json(je.at("time_min"));
    if (je.contains("fd")) {
      const json& fd = je.at("fd");
      e.fd.free_flow_speed_kmh = rational_from_json(fd.at("free_flow_speed_kmh"));
      e.fd.shockwave_speed_kmh = rational_from_json(fd.at("shockwave_speed_kmh"));
      e.fd.jam_density_veh_km = rational_from_json(fd.at("jam_density_veh_km"));
      e.fd.base_capacity_veh_h = rational_from_json(fd.at("base_capacity_veh_h"));
    }
    edges.push_back(std::move(e));
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

json instance_json(const Instance& inst) {
  json vehicles = json::array();
  for (const Vehicle& v : inst.vehicles) {
    json jv = {{"id", v.id},
               {"origin", v.origin},
               {"dest", v.dest},
               {"earliest_departure", rational_json(v.earliest_departure)},
               {"deadline", rational_json(v.deadline)},
               {"platoon_capable", v.platoon_capable}};
    if (v.wait_cost) jv["wait_cost"] = rational_json(*v.wait_cost);
    vehicles.push_back(std::move(jv));
  }
  return {{"network", network_json(inst.net())},
          {"vehicles", std::move(vehicles)},
          {"max_wait", rational_json(inst.max_wait)},
          {"eta", rational_json(inst.eta)},
          {"wait_cost_rate", rational_json(inst.wait_cost_rate)}};
}

Instance instance_from_json(const json& j) {
  Instance inst;
  inst.network = std::make_shared<const RoadNetwork>(network_from_json(j.at("network")));
  for (const json& jv : j.at("vehicles")) {
    Vehicle v;
    v.id = jv.at("id").get<int>();
    v.origin = jv.at("origin").get<NodeId>();
    v.dest = jv.at("dest").get<NodeId>();
    v.earliest_departure = rational_from_json(jv.at("earliest_departure"));
    v.deadline = rational_from_json(jv.at("deadline"));
    v.platoon_capable = jv.value("platoon_capable", true);
    if (jv.contains("wait_cost")) v.wait_cost = rational_from_json(jv.at("wait_cost"));
    inst.vehicles.push_back(std::move(v));
  }
  inst.max_wait = rational_from_json(j.at("max_wait"));
  if (j.contains("eta")) inst.eta = rational_from_json(j.at("eta"));
  if (j.contains("wait_cost_rate")) inst.wait_cost_rate = rational_from_json(j.at("wait_cost_rate"));
  return inst;
}

json plan_json(const Plan& plan) {
  json vehicles = json::array();
  for (const VehiclePlan& vp : plan.vehicles) {
    json entries = json::array();
    for (const Rational& t : vp.entry_times) entries.push_back(rational_json(t));
    vehicles.push_back({{"id", vp.vehicle_id},
                        {"route_edges", vp.route_edges},
                        {"delay", rational_json(vp.delay)},
                        {"entry_times", std::move(entries)}});
  }
  json platoons = json::array();
  for (const PlatoonGroup& g : plan.platoons) {
    platoons.push_back({{"edge", g.edge_index},
                        {"entry_time", rational_json(g.entry_time)},
                        {"vehicle_ids", g.vehicle_ids}});
  }
  return {{"status", to_string(plan.status)},
          {"objective", rational_json(plan.objective)},
          {"vehicles", std::move(vehicles)},
          {"platoons", std::move(platoons)}};
}

Plan plan_from_json(const json& j) {
  Plan plan;
  plan.status = solve_status_from_string(j.at("status").get<std::string>());
  plan.objective = rational_from_json(j.at("objective"));
  for (const json& jv : j.at("vehicles")) {
    VehiclePlan vp;
    vp.vehicle_id = jv.at("id").get<int>();
    vp.route_edges = jv.at("route_edges").get<std::vector<int>>();
    vp.delay = rational_from_json(jv.at("delay"));
    for (const json& t : jv.at("entry_times")) vp.entry_times.push_back(rational_from_json(t));
    plan.vehicles.push_back(std::move(vp));
  }
  for (const json& jg : j.at("platoons")) {
    PlatoonGroup g;
    g.edge_index = jg.at("edge").get<int>();
    g.entry_time = rational_from_json(jg.at("entry_time"));
    g.vehicle_ids = jg.at("vehicle_ids").get<std::vector<int>>();
    plan.platoons.push_back(std::move(g));
  }
  return plan;
}

json metrics_json(const MetricsReport& rep) {
  auto summary = [](const DistributionSummary& s) {
    return json{{"min", rational_json(s.min)},     {"q1", rational_json(s.q1)},
                {"median", rational_json(s.median)}, {"q3", rational_json(s.q3)},
                {"max", rational_json(s.max)},     {"mean", rational_json(s.mean)}};
  };
  json rows = json::array();
  for (const VehicleMetrics& r : rep.vehicles) {
    rows.push_back({{"vehicle", r.vehicle_id},
                    {"platoon_vmt", rational_json(r.platoon_vmt)},
                    {"follower_vmt", rational_json(r.follower_vmt)},
                    {"total_vmt", rational_json(r.total_vmt)},
                    {"vmt_ratio", rational_json(r.vmt_ratio)},
                    {"wait_min", rational_json(r.wait_min)},
                    {"savings_usd", rational_json(r.savings_usd)}});
  }
  return {{"vehicles", std::move(rows)},
          {"aggregate_vmt_ratio", rational_json(rep.aggregate_vmt_ratio)},
          {"mean_vmt_ratio", rational_json(rep.mean_vmt_ratio)},
          {"mean_wait_min", rational_json(rep.mean_wait_min)},
          {"total_savings_usd", rational_json(rep.total_savings_usd)},
          {"wait_min", summary(rep.wait_min)},
          {"savings_usd", summary(rep.savings_usd)}};
}

CapacityFactorTable load_factor_table(std::istream& in) {
  CapacityFactorTable table;
  table.rows.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string share, mult, extra;
    if (!(ls >> share)) continue;  // blank line
    if (!(ls >> mult) || (ls >> extra)) {
      throw ValidationError("factor table line " + std::to_string(lineno) +
                            ": want two columns (share multiplier)");
    }
    table.rows.emplace_back(Rational::parse(share), Rational::parse(mult));
  }
  validate_factor_table(table);
  return table;
}

AnimationTimeline make_timeline(const RoadNetwork& net, const Plan& plan,
                                const Rational& interval_min) {
  if (interval_min <= Rational(0)) throw ValidationError("sampling interval must be positive");

  // structural feasibility: continuous routes, platoons on their members
  std::map<std::pair<int, std::pair<int, Rational>>, bool> traversals;  // (vehicle, slot)
  for (const VehiclePlan& vp : plan.vehicles) {
    if (vp.entry_times.size() != vp.route_edges.size()) {
      throw ValidationError("plan entry times do not match the route");
    }
    for (std::size_t k = 0; k < vp.route_edges.size(); ++k) {
      const Edge& e = net.edge(vp.route_edges[k]);
      if (k > 0 && net.edge(vp.route_edges[k - 1]).to != e.from) {
        throw ValidationError("plan route is not connected");
      }
      if (k + 1 < vp.route_edges.size() &&
          vp.entry_times[k] + e.time_min != vp.entry_times[k + 1]) {
        throw ValidationError("plan entry times break continuity");
      }
      traversals[{vp.vehicle_id, {vp.route_edges[k], vp.entry_times[k]}}] = true;
    }
  }
  std::map<std::pair<int, std::pair<int, Rational>>, int> membership;  // -> group index
  for (std::size_t gi = 0; gi < plan.platoons.size(); ++gi) {
    const PlatoonGroup& g = plan.platoons[gi];
    if (g.vehicle_ids.size() < 2) throw ValidationError("platoon group below two vehicles");
    for (int id : g.vehicle_ids) {
      auto key = std::make_pair(id, std::make_pair(g.edge_index, g.entry_time));
      if (!traversals.count(key)) {
        throw ValidationError("platoon group names a vehicle that is not there");
      }
      membership[key] = static_cast<int>(gi);
    }
  }

  AnimationTimeline tl;
  tl.interval_min = interval_min;
  if (plan.vehicles.empty()) return tl;

  bool have_span = false;
  Rational t0, t1;
  for (const VehiclePlan& vp : plan.vehicles) {
    if (vp.route_edges.empty()) continue;
    const Rational start = vp.entry_times.front();
    const Rational end =
        vp.entry_times.back() + net.edge(vp.route_edges.back()).time_min;
    if (!have_span || start < t0) t0 = start;
    if (!have_span || t1 < end) t1 = end;
    have_span = true;
  }
  if (!have_span) return tl;

  for (Rational t = t0;; t += interval_min) {
    if (t > t1) t = t1;  // exact endpoint
    TimelineFrame frame;
    frame.time_min = t;
    for (const VehiclePlan& vp : plan.vehicles) {
      for (std::size_t k = 0; k < vp.route_edges.size(); ++k) {
        const Edge& e = net.edge(vp.route_edges[k]);
        const Rational enter = vp.entry_times[k];
        const Rational leave = enter + e.time_min;
        const bool last = k + 1 == vp.route_edges.size();
        if (t < enter || t > leave || (!last && t == leave)) continue;
        TimelineSample s;
        s.vehicle_id = vp.vehicle_id;
        s.edge_index = vp.route_edges[k];
        s.progress = (t - enter) / e.time_min;
        auto key = std::make_pair(vp.vehicle_id, std::make_pair(vp.route_edges[k], enter));
        if (auto it = membership.find(key); it != membership.end()) s.platoon_group = it->second;
        frame.vehicles.push_back(s);
        break;
      }
    }
    tl.frames.push_back(std::move(frame));
    if (t == t1) break;
  }
  return tl;
}

json timeline_json(const AnimationTimeline& tl) {
  json frames = json::array();
  for (const TimelineFrame& f : tl.frames) {
    json vehicles = json::array();
    for (const TimelineSample& s : f.vehicles) {
      vehicles.push_back({{"vehicle", s.vehicle_id},
                          {"edge", s.edge_index},
                          {"progress", rational_json(s.progress)},
                          {"platoon_group", s.platoon_group}});
    }
    frames.push_back({{"time_min", rational_json(f.time_min)}, {"vehicles", std::move(vehicles)}});
  }
  return {{"interval_min", rational_json(tl.interval_min)}, {"frames", std::move(frames)}};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return json::parse(in);
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

}  // namespace platoon
