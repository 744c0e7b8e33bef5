#include "platoon/plan.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace platoon {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::time_limit_best:
      return "time-limit-best";
    case SolveStatus::heuristic:
      return "heuristic";
    case SolveStatus::opportunistic:
      return "opportunistic";
  }
  return "unknown";
}

SolveStatus solve_status_from_string(const std::string& s) {
  if (s == "optimal") return SolveStatus::optimal;
  if (s == "time-limit-best") return SolveStatus::time_limit_best;
  if (s == "heuristic") return SolveStatus::heuristic;
  if (s == "opportunistic") return SolveStatus::opportunistic;
  throw std::invalid_argument("unknown solve status: " + s);
}

std::vector<NodeId> route_nodes(const RoadNetwork& net, const VehiclePlan& vp) {
  std::vector<NodeId> nodes;
  if (vp.route_edges.empty()) return nodes;
  nodes.push_back(net.edge(vp.route_edges.front()).from);
  for (int ei : vp.route_edges) nodes.push_back(net.edge(ei).to);
  return nodes;
}

std::vector<PlatoonGroup> derive_platoon_groups(const Instance& inst,
                                                const std::vector<VehiclePlan>& vehicles) {
  std::map<int, bool> capable;
  for (const Vehicle& v : inst.vehicles) capable[v.id] = v.platoon_capable;

  std::map<std::pair<int, Rational>, std::vector<int>> cotimed;
  for (const VehiclePlan& vp : vehicles) {
    auto it = capable.find(vp.vehicle_id);
    if (it == capable.end() || !it->second) continue;
    for (std::size_t k = 0; k < vp.route_edges.size(); ++k) {
      cotimed[{vp.route_edges[k], vp.entry_times.at(k)}].push_back(vp.vehicle_id);
    }
  }
  std::vector<PlatoonGroup> groups;
  for (auto& [key, members] : cotimed) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    groups.push_back(PlatoonGroup{key.first, key.second, members});
  }
  return groups;
}

Rational compute_plan_objective(const Instance& inst, const std::vector<VehiclePlan>& vehicles) {
  const RoadNetwork& net = inst.net();
  Rational total;
  std::map<int, const Vehicle*> byid;
  for (const Vehicle& v : inst.vehicles) byid[v.id] = &v;
  for (const VehiclePlan& vp : vehicles) {
    for (int ei : vp.route_edges) total += net.edge(ei).cost;
    auto it = byid.find(vp.vehicle_id);
    if (it == byid.end()) throw ValidationError("plan references unknown vehicle");
    total += inst.vehicle_wait_cost(*it->second) * vp.delay;
  }
  for (const PlatoonGroup& g : derive_platoon_groups(inst, vehicles)) {
    Rational followers(static_cast<std::int64_t>(g.vehicle_ids.size()) - 1);
    total -= inst.eta * net.edge(g.edge_index).cost * followers;
  }
  return total;
}

}  // namespace platoon
