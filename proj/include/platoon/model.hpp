#ifndef PLATOON_MODEL_HPP
#define PLATOON_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "platoon/instance.hpp"
#include "platoon/plan.hpp"

namespace platoon {

struct ModelMismatchError : std::runtime_error {
  explicit ModelMismatchError(const std::string& what) : std::runtime_error(what) {}
};

// Entry-time window of a vehicle on one edge, over all of its admissible
// paths and delays.
struct EntryWindow {
  Rational earliest;
  Rational latest;
  bool overlaps(const EntryWindow& o) const { return earliest <= o.latest && o.earliest <= latest; }
};

// Variable space of one vehicle after pruning. An edge carries a flow
// variable when some route within the detour budget and the vehicle's time
// window crosses it; its window spans the entry times compatible with such
// a route (earliest undelayed entry up to the latest entry that still meets
// the deadline). Computed by cost/time Pareto labeling, so construction
// never enumerates routes and scales to dense networks.
struct VehicleVariables {
  int vehicle_pos = 0;  // index into Instance::vehicles
  Rational shortest_cost;
  Rational shortest_time;                 // fastest admissible route
  std::map<int, EntryWindow> edge_windows;  // edge index -> window
};

// The coordinated-platooning decision model: which flow (f), follow (q) and
// delay (t) variables exist for an instance. Variables are generated only
// where a vehicle can actually use an edge within its detour bound and time
// window, and follow variables only where two vehicles' windows overlap.
class CoordinationModel {
 public:
  // Single-threaded by design; the result is immutable and safe to share
  // across solver workers.
  static CoordinationModel build(const Instance& inst);

  const Instance& instance() const { return inst_; }
  const std::vector<VehicleVariables>& vehicles() const { return vehicles_; }

  bool has_flow(int vehicle_pos, int edge_index) const {
    return vehicles_[vehicle_pos].edge_windows.count(edge_index) > 0;
  }
  // Follow variable q_{v,w,edge}: v follows w. Exists symmetrically.
  bool has_follow(int v_pos, int w_pos, int edge_index) const {
    return follows_.count(follow_key(v_pos, w_pos, edge_index)) > 0;
  }
  // Positions of other vehicles w such that q_{v,w,e} exists.
  const std::vector<int>& follow_partners(int v_pos, int edge_index) const;

  std::size_t flow_count() const { return flow_count_; }
  std::size_t follow_count() const { return follows_.size(); }
  std::size_t delay_count() const { return vehicles_.size(); }

 private:
  static std::uint64_t follow_key(int v, int w, int e) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)) << 40) ^
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(w)) << 20) ^
           static_cast<std::uint32_t>(e);
  }

  Instance inst_;
  std::vector<VehicleVariables> vehicles_;
  std::unordered_set<std::uint64_t> follows_;
  std::unordered_map<std::uint64_t, std::vector<int>> partners_;  // (v,e) -> [w]
  std::size_t flow_count_ = 0;
};

// A value for every variable of a CoordinationModel. Vehicles are indexed as
// in the instance; edges a vehicle uses are listed with their entry times.
struct Assignment {
  struct PerVehicle {
    std::vector<std::pair<int, Rational>> edge_entries;  // (edge index, entry time)
    Rational delay;
  };
  struct Follow {
    int follower_pos;
    int leader_pos;
    int edge_index;
  };
  std::vector<PerVehicle> vehicles;
  std::vector<Follow> follows;
};

// Eq-style objective: sum C*(f - eta * sum_w q) + sum epsilon * t. Throws
// ModelMismatchError when the assignment activates variables the model never
// generated or its dimensions differ.
Rational objective_value(const CoordinationModel& model, const Assignment& a);

struct Violation {
  enum class Kind {
    unknown_flow,        // active edge without a generated f variable
    unknown_follow,      // active follow without a generated q variable
    route_broken,        // active edges do not chain origin -> destination
    departure_mismatch,  // first entry != T_O + t
    delay_out_of_bounds,
    progression_mismatch,  // entry(k+1) != entry(k) + traversal time
    deadline_missed,
    follow_without_flow,
    sync_mismatch,    // follow pair with unequal entry times
    multiple_follow,  // vehicle follows two vehicles on one edge
    leader_missing,   // every member of a platoon follows someone
  };
  Kind kind;
  int vehicle = -1;  // vehicle id (not position)
  int other = -1;    // second vehicle id where applicable
  int edge_index = -1;
  std::string detail;
};

std::string to_string(Violation::Kind k);

// Verifies flow conservation, departure, no-intermediate-wait progression,
// deadlines, platoon entry-time synchronization and leader uniqueness.
// Empty result means feasible.
std::vector<Violation> check_feasibility(const CoordinationModel& model, const Assignment& a);

// Assignment induced by a plan: flows and entries from the routes, follow
// variables star-shaped onto the smallest vehicle id of each platoon group.
Assignment assignment_from_plan(const CoordinationModel& model, const Plan& plan);

// LP-style text dump of the generated variables and linear constraint rows,
// for eyeballing or cross-checking against an external modeling stack.
void write_lp(const CoordinationModel& model, std::ostream& os);

}  // namespace platoon

#endif  // PLATOON_MODEL_HPP
