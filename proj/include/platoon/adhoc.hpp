#pragma once

#include <utility>
#include <vector>

#include "platoon/instance.hpp"
#include "platoon/plan.hpp"

namespace platoon {

// Piecewise-linear map from platoon share to a capacity multiplier.
// Rows are (share, multiplier) with shares strictly increasing over [0,1];
// the first row must be (0, 1) and multipliers must be nondecreasing.
// The default anchors full platooning at 2200 -> 4000 veh/h.
struct CapacityFactorTable {
  std::vector<std::pair<Rational, Rational>> rows = {{Rational(0), Rational(1)},
                                                     {Rational(1), Rational(20, 11)}};
};

// Effective capacity of a link whose traffic platoons at the given share.
Rational adjust_capacity(const FundamentalDiagram& fd, const Rational& platoon_share,
                         const CapacityFactorTable& table = {});

// Throws unless rows start at (0, 1) with strictly increasing shares in
// [0, 1] and nondecreasing multipliers.
void validate_factor_table(const CapacityFactorTable& table);

// One point of a cumulative-count curve: vehicle index against crossing time.
// Indices between records are meaningful by linear interpolation.
struct CountRecord {
  Rational vehicle;
  Rational time_min;
};

// Boundary records of one link, in entry order.
struct LinkState {
  Rational length_km;
  std::vector<CountRecord> entries;            // crossing times at the upstream end
  std::vector<CountRecord> exits;              // crossing times at the downstream end
  std::vector<std::vector<int>> platoon_runs;  // maximal runs of co-moving capable entrants
  Rational effective_capacity_veh_h;

  void record_entry(const Rational& vehicle, const Rational& time_min);
  void record_exit(const Rational& vehicle, const Rational& time_min);
};

// Time at which vehicle n crosses position x (km from the upstream end) per
// Newell's exact solution:
//   T(x,n) = max( T(0,n) + x/u , T(L, n - rho_jam*(L - x)) + (L - x)/w )
// The second term drops out when the referenced downstream record predates
// everything recorded (uncongested); a reference past the newest exit record
// clamps to that record, the FIFO floor. Times are minutes, speeds km/h.
Rational newell_crossing_time(const LinkState& link, const FundamentalDiagram& fd,
                              const Rational& x_km, const Rational& n);

struct AdhocConfig {
  // Maximum entry-time gap for consecutive capable entrants to platoon.
  // Zero demands exact coincidence, matching the coordination model; positive
  // values are for sensitivity studies and may leave the model's feasibility
  // check unsatisfied.
  Rational headway_delta = Rational(0);
  // Finite link capacity: exits obey the capacity headway and the kinematic
  // wave constraint instead of pure free flow. Travel times then exceed the
  // free-flow times the coordination model assumes.
  bool congestion = false;
  CapacityFactorTable factors;
};

// Uncoordinated baseline: everyone departs immediately along the
// deterministic shortest route; platoons happen where entries coincide.
// Optionally reports the per-edge link states actually simulated.
Plan simulate_opportunistic(const Instance& inst, const AdhocConfig& cfg = {},
                            std::vector<LinkState>* link_states = nullptr);

}  // namespace platoon
