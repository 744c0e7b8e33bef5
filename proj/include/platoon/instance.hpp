#ifndef PLATOON_INSTANCE_HPP
#define PLATOON_INSTANCE_HPP

#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "platoon/network.hpp"
#include "platoon/rational.hpp"

namespace platoon {

// One trip request. Times are minutes from the scenario start.
struct Vehicle {
  int id = 0;
  NodeId origin = -1;
  NodeId dest = -1;
  Rational earliest_departure;          // T_O
  Rational deadline;                    // T_D
  bool platoon_capable = true;
  std::optional<Rational> wait_cost;    // overrides the instance-wide rate

  friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

// A coordination problem: a shared network plus the trips to route.
// Immutable once built; the network is shared, never copied per instance.
struct Instance {
  std::shared_ptr<const RoadNetwork> network;
  std::vector<Vehicle> vehicles;
  Rational max_wait;            // p, minutes
  Rational eta = Rational(1, 10);       // fuel fraction saved by a follower
  Rational wait_cost_rate;      // epsilon, per-minute cost of waiting (default 0)

  const RoadNetwork& net() const { return *network; }

  Rational vehicle_wait_cost(const Vehicle& v) const {
    return v.wait_cost ? *v.wait_cost : wait_cost_rate;
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return *a.network == *b.network && a.vehicles == b.vehicles && a.max_wait == b.max_wait &&
           a.eta == b.eta && a.wait_cost_rate == b.wait_cost_rate;
  }
};

// Validates invariants: known distinct endpoints, eta in [0,1), p >= 0 and
// every deadline reachable (T_D >= T_O + shortest time). Throws
// ValidationError naming the offending vehicle.
void validate_instance(const Instance& inst);

// Truncated normal over [low, high] minutes.
struct DepartureDistribution {
  Rational low = 0;
  Rational high = 100;
  double mean = 50.0;
  double stddev = 10.0;
};

// One draw by rejection from the untruncated normal; the acceptance rate is
// high for the case-study parameters. stddev == 0 collapses to the mean.
double sample_truncated_normal(const DepartureDistribution& dist, std::mt19937_64& rng);

// Random instance matching the case study: origins/destinations uniform over
// nodes (distinct, reachable), departures from the truncated normal
// quantized to time_resolution so departure alignment stays reachable on the
// solver's delay grid, deadlines from the earliest-arrival-plus-p rule.
// Deterministic in seed.
Instance generate_case_study(std::shared_ptr<const RoadNetwork> net, int n_vehicles,
                             const DepartureDistribution& dist, const Rational& max_wait,
                             std::uint64_t seed, const Rational& eta = Rational(1, 10),
                             const Rational& wait_cost_rate = Rational(0),
                             const Rational& time_resolution = Rational(1));

}  // namespace platoon

#endif  // PLATOON_INSTANCE_HPP
