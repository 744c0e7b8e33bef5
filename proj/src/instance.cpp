#include "platoon/instance.hpp"

#include <string>
#include <unordered_set>

namespace platoon {

void validate_instance(const Instance& inst) {
  if (!inst.network) throw ValidationError("instance has no network");
  if (inst.eta < Rational(0) || inst.eta >= Rational(1)) {
    throw ValidationError("eta must lie in [0,1)");
  }
  if (inst.max_wait < Rational(0)) throw ValidationError("max wait must be nonnegative");
  if (inst.wait_cost_rate < Rational(0)) throw ValidationError("wait cost rate must be nonnegative");
  const RoadNetwork& net = inst.net();
  std::unordered_set<int> ids;
  for (const Vehicle& v : inst.vehicles) {
    const std::string tag = "vehicle " + std::to_string(v.id);
    if (!ids.insert(v.id).second) throw ValidationError(tag + ": duplicate id");
    if (v.wait_cost && *v.wait_cost < Rational(0)) {
      throw ValidationError(tag + ": negative wait cost");
    }
    if (!net.has_node(v.origin)) throw ValidationError(tag + ": unknown origin node");
    if (!net.has_node(v.dest)) throw ValidationError(tag + ": unknown destination node");
    if (v.origin == v.dest) throw ValidationError(tag + ": origin equals destination");
    auto times = min_times_to(net, v.dest);
    auto it = times.find(v.origin);
    if (it == times.end()) throw ValidationError(tag + ": destination unreachable from origin");
    if (v.deadline < v.earliest_departure + it->second) {
      throw ValidationError(tag + ": deadline earlier than best possible arrival");
    }
  }
}

double sample_truncated_normal(const DepartureDistribution& dist, std::mt19937_64& rng) {
  const double lo = dist.low.to_double();
  const double hi = dist.high.to_double();
  if (!(lo < hi)) throw ValidationError("departure distribution needs low < high");
  if (dist.stddev < 0) throw ValidationError("departure distribution needs stddev >= 0");
  if (dist.stddev == 0.0) {
    double m = dist.mean;
    return m < lo ? lo : (m > hi ? hi : m);
  }
  std::normal_distribution<double> normal(dist.mean, dist.stddev);
  for (;;) {
    double x = normal(rng);
    if (x >= lo && x <= hi) return x;
  }
}

Instance generate_case_study(std::shared_ptr<const RoadNetwork> net, int n_vehicles,
                             const DepartureDistribution& dist, const Rational& max_wait,
                             std::uint64_t seed, const Rational& eta,
                             const Rational& wait_cost_rate, const Rational& time_resolution) {
  if (!net) throw ValidationError("generate_case_study: null network");
  if (n_vehicles < 1) throw ValidationError("generate_case_study: need at least one vehicle");
  if (net->node_count() < 2) throw ValidationError("generate_case_study: need >= 2 nodes");
  if (max_wait < Rational(0)) throw ValidationError("generate_case_study: negative max wait");

  // A network where no ordered pair is reachable can never host a trip.
  bool any_pair = false;
  for (NodeId n : net->nodes()) {
    auto reach = min_costs_from(*net, n);
    if (reach.size() > 1) {
      any_pair = true;
      break;
    }
  }
  if (!any_pair) throw ValidationError("generate_case_study: no reachable origin/destination pair");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, net->node_count() - 1);

  Instance inst;
  inst.network = std::move(net);
  inst.max_wait = max_wait;
  inst.eta = eta;
  inst.wait_cost_rate = wait_cost_rate;
  inst.vehicles.reserve(static_cast<std::size_t>(n_vehicles));

  const RoadNetwork& g = inst.net();
  for (int i = 0; i < n_vehicles; ++i) {
    Vehicle v;
    v.id = i;
    for (;;) {
      NodeId o = g.nodes()[pick(rng)];
      NodeId d = g.nodes()[pick(rng)];
      if (o == d) continue;
      Rational best_time;
      try {
        best_time = shortest_path(g, o, d).total_time;
      } catch (const NoPathError&) {
        continue;
      }
      v.origin = o;
      v.dest = d;
      double draw = sample_truncated_normal(dist, rng);
      // Quantize departures to the grid; continuous draws would make the
      // entry-time equality required for platooning unreachable.
      Rational approx = Rational(static_cast<std::int64_t>(draw * 1000000.0), 1000000);
      Rational t0 = approx.round_to_multiple(time_resolution);
      if (t0 < dist.low) t0 = dist.low;
      if (t0 > dist.high) t0 = dist.high;
      v.earliest_departure = t0;
      v.deadline = t0 + best_time + max_wait;
      break;
    }
    inst.vehicles.push_back(v);
  }
  return inst;
}

}  // namespace platoon
