#ifndef PLATOON_PLAN_HPP
#define PLATOON_PLAN_HPP

#include <string>
#include <vector>

#include "platoon/instance.hpp"
#include "platoon/network.hpp"
#include "platoon/rational.hpp"

namespace platoon {

enum class SolveStatus {
  optimal,
  time_limit_best,
  heuristic,
  opportunistic,  // emitted by the ad hoc simulator
};

std::string to_string(SolveStatus s);
SolveStatus solve_status_from_string(const std::string& s);

struct VehiclePlan {
  int vehicle_id = 0;
  std::vector<int> route_edges;       // edge indices along the route
  Rational delay;                     // departure delay, minutes
  std::vector<Rational> entry_times;  // one per route edge

  friend bool operator==(const VehiclePlan&, const VehiclePlan&) = default;
};

// Vehicles sharing an edge with identical entry times.
struct PlatoonGroup {
  int edge_index = -1;
  Rational entry_time;
  std::vector<int> vehicle_ids;  // sorted; the smallest id is the leader

  friend bool operator==(const PlatoonGroup&, const PlatoonGroup&) = default;
};

struct Plan {
  std::vector<VehiclePlan> vehicles;
  std::vector<PlatoonGroup> platoons;
  Rational objective;
  SolveStatus status = SolveStatus::optimal;

  const VehiclePlan* find_vehicle(int id) const {
    for (const auto& v : vehicles)
      if (v.vehicle_id == id) return &v;
    return nullptr;
  }

  friend bool operator==(const Plan&, const Plan&) = default;
};

// Node sequence of a vehicle plan's route.
std::vector<NodeId> route_nodes(const RoadNetwork& net, const VehiclePlan& vp);

// Groups platoon-capable vehicles by identical (edge, entry time); only
// groups of two or more form a platoon. Output is sorted by (edge index,
// entry time) and member ids ascending.
std::vector<PlatoonGroup> derive_platoon_groups(const Instance& inst,
                                                const std::vector<VehiclePlan>& vehicles);

// Eq-style fuel-plus-wait total of a plan: sum of route costs minus the
// follower discount eta*C per platoon member beyond the leader, plus the
// per-vehicle waiting cost. Platoon groups are derived from entry times.
Rational compute_plan_objective(const Instance& inst, const std::vector<VehiclePlan>& vehicles);

}  // namespace platoon

#endif  // PLATOON_PLAN_HPP
