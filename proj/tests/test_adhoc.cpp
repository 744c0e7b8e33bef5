#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>
#include <vector>

#include "platoon/adhoc.hpp"
#include "platoon/model.hpp"

using namespace platoon;

namespace {

std::shared_ptr<const RoadNetwork> line_net(int n_edges) {
  std::vector<NodeId> nodes;
  std::vector<Edge> edges;
  for (int i = 0; i <= n_edges; ++i) nodes.push_back(i);
  for (int i = 0; i < n_edges; ++i) edges.push_back(Edge{i, i + 1, Rational(1), Rational(1), {}});
  return std::make_shared<const RoadNetwork>(nodes, edges);
}

Vehicle vehicle(int id, NodeId o, NodeId d, Rational t0, Rational deadline, bool capable = true) {
  Vehicle v;
  v.id = id;
  v.origin = o;
  v.dest = d;
  v.earliest_departure = t0;
  v.deadline = deadline;
  v.platoon_capable = capable;
  return v;
}

}  // namespace

TEST_CASE("free flow crosses one kilometre per minute at sixty") {
  LinkState link;
  link.length_km = Rational(1);
  link.record_entry(Rational(0), Rational(0));
  FundamentalDiagram fd;  // u = 60
  CHECK(newell_crossing_time(link, fd, Rational(1), Rational(0)) == Rational(1));
  CHECK(newell_crossing_time(link, fd, Rational(1, 2), Rational(0)) == Rational(1, 2));
}

TEST_CASE("crossing the upstream end is the entry time itself") {
  LinkState link;
  link.length_km = Rational(2);
  link.record_entry(Rational(0), Rational(7));
  CHECK(newell_crossing_time(link, FundamentalDiagram{}, Rational(0), Rational(0)) == Rational(7));
}

TEST_CASE("a jammed link holds the entrant until the queue moves") {
  // one full jam of 150 vehicles: the newcomer cannot pass the downstream end
  // before the vehicle a jam ahead of it has cleared
  LinkState link;
  link.length_km = Rational(1);
  link.record_entry(Rational(150), Rational(0));
  link.exits.push_back(CountRecord{Rational(0), Rational(10)});
  FundamentalDiagram fd;  // u=60 w=20 rho=150
  CHECK(newell_crossing_time(link, fd, Rational(1), Rational(150)) == Rational(10));
}

TEST_CASE("wave references interpolate between exit records") {
  LinkState link;
  link.length_km = Rational(1);
  link.record_entry(Rational(0), Rational(0));
  link.record_entry(Rational(200), Rational(0));
  link.exits.push_back(CountRecord{Rational(0), Rational(10)});
  link.exits.push_back(CountRecord{Rational(100), Rational(16)});
  FundamentalDiagram fd;
  // at x = 1/2 vehicle 125 looks back rho/2 = 75 counts to 50, whose exit
  // interpolates to 10 + 6 * 50/100 = 13; the half-kilometre wave adds 1.5
  CHECK(newell_crossing_time(link, fd, Rational(1, 2), Rational(125)) == Rational(29, 2));
  // past the newest exit record the constraint clamps to it
  CHECK(newell_crossing_time(link, fd, Rational(1, 2), Rational(200)) == Rational(35, 2));
}

TEST_CASE("unknown vehicles and positions are rejected") {
  LinkState link;
  link.length_km = Rational(1);
  link.record_entry(Rational(3), Rational(0));
  FundamentalDiagram fd;
  CHECK_THROWS_AS(newell_crossing_time(link, fd, Rational(1), Rational(4)), ValidationError);
  CHECK_THROWS_AS(newell_crossing_time(link, fd, Rational(1), Rational(2)), ValidationError);
  CHECK_THROWS_AS(newell_crossing_time(link, fd, Rational(2), Rational(3)), ValidationError);
  CHECK_THROWS_AS(newell_crossing_time(link, fd, Rational(-1), Rational(3)), ValidationError);
  FundamentalDiagram bad;
  bad.free_flow_speed_kmh = Rational(0);
  CHECK_THROWS_AS(newell_crossing_time(link, bad, Rational(1), Rational(3)), ValidationError);
}

TEST_CASE("link records stay FIFO") {
  LinkState link;
  link.length_km = Rational(1);
  link.record_entry(Rational(0), Rational(5));
  CHECK_THROWS_AS(link.record_entry(Rational(1), Rational(4)), ValidationError);
  CHECK_THROWS_AS(link.record_entry(Rational(0), Rational(6)), ValidationError);
  link.record_exit(Rational(0), Rational(6));
  CHECK_THROWS_AS(link.record_exit(Rational(1), Rational(7)), ValidationError);  // no entry yet
}

TEST_CASE("capacity adjustment interpolates the factor table") {
  FundamentalDiagram fd;  // base 2200
  CHECK(adjust_capacity(fd, Rational(0)) == Rational(2200));
  CHECK(adjust_capacity(fd, Rational(1)) == Rational(4000));
  CHECK(adjust_capacity(fd, Rational(1, 2)) == Rational(3100));  // halfway to 20/11

  CapacityFactorTable table;
  table.rows = {{Rational(0), Rational(1)}, {Rational(1, 2), Rational(3, 2)}};
  CHECK(adjust_capacity(fd, Rational(1, 4), table) == Rational(2750));
  CHECK(adjust_capacity(fd, Rational(1), table) == Rational(3300));  // clamped past last row

  CHECK_THROWS_AS(adjust_capacity(fd, Rational(-1, 10)), ValidationError);
  CHECK_THROWS_AS(adjust_capacity(fd, Rational(11, 10)), ValidationError);
  CapacityFactorTable bad;
  bad.rows = {{Rational(0), Rational(2)}};
  CHECK_THROWS_AS(adjust_capacity(fd, Rational(0), bad), ValidationError);
  bad.rows = {{Rational(0), Rational(1)}, {Rational(1), Rational(1, 2)}};
  CHECK_THROWS_AS(adjust_capacity(fd, Rational(0), bad), ValidationError);
}

TEST_CASE("a lone vehicle simulates to its shortest route") {
  Instance inst;
  inst.network = line_net(2);
  inst.max_wait = Rational(5);
  inst.vehicles = {vehicle(3, 0, 2, Rational(4), Rational(60))};
  Plan plan = simulate_opportunistic(inst);
  CHECK(plan.objective == Rational(2));
  CHECK(plan.platoons.empty());
  CHECK(plan.status == SolveStatus::opportunistic);
  CHECK(plan.vehicles[0].delay == Rational(0));
  CHECK(plan.vehicles[0].entry_times == std::vector<Rational>{Rational(4), Rational(5)});
}

TEST_CASE("simultaneous identical trips platoon on every link") {
  Instance inst;
  inst.network = line_net(3);
  inst.max_wait = Rational(0);
  inst.vehicles = {vehicle(0, 0, 3, Rational(2), Rational(30)),
                   vehicle(1, 0, 3, Rational(2), Rational(30))};
  Plan plan = simulate_opportunistic(inst);
  CHECK(plan.objective == Rational(57, 10));
  REQUIRE(plan.platoons.size() == 3);
  for (const auto& g : plan.platoons) CHECK(g.vehicle_ids == std::vector<int>{0, 1});

  // offset departures miss each other everywhere under exact coincidence
  inst.vehicles[1].earliest_departure = Rational(3);
  plan = simulate_opportunistic(inst);
  CHECK(plan.objective == Rational(6));
  CHECK(plan.platoons.empty());

  // a headway window recovers them
  AdhocConfig cfg;
  cfg.headway_delta = Rational(2);
  plan = simulate_opportunistic(inst, cfg);
  CHECK(plan.objective == Rational(57, 10));
  REQUIRE(plan.platoons.size() == 3);
  CHECK(plan.platoons[0].vehicle_ids == std::vector<int>{0, 1});

  cfg.headway_delta = Rational(1, 2);  // too tight again
  plan = simulate_opportunistic(inst, cfg);
  CHECK(plan.platoons.empty());
}

TEST_CASE("non-capable vehicles never join runs") {
  Instance inst;
  inst.network = line_net(1);
  inst.max_wait = Rational(0);
  inst.vehicles = {vehicle(0, 0, 1, Rational(0), Rational(10)),
                   vehicle(1, 0, 1, Rational(0), Rational(10), false),
                   vehicle(2, 0, 1, Rational(0), Rational(10))};
  Plan plan = simulate_opportunistic(inst);
  REQUIRE(plan.platoons.size() == 1);
  CHECK(plan.platoons[0].vehicle_ids == std::vector<int>{0, 2});
  CHECK(plan.objective == Rational(3) - Rational(1, 10));
}

TEST_CASE("opportunistic plans pass the coordination feasibility check") {
  auto net = std::make_shared<const RoadNetwork>(make_grid(4, 4, Rational(1), Rational(1)));
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Instance inst = generate_case_study(net, 6, DepartureDistribution{}, Rational(5), seed);
    Plan plan = simulate_opportunistic(inst);
    CoordinationModel model = CoordinationModel::build(inst);
    Assignment a = assignment_from_plan(model, plan);
    CHECK(check_feasibility(model, a).empty());
    CHECK(objective_value(model, a) == plan.objective);
  }
}

TEST_CASE("free-flow traversal equals length over speed exactly") {
  std::vector<NodeId> nodes{0, 1, 2};
  FundamentalDiagram fd;
  fd.free_flow_speed_kmh = Rational(90);
  std::vector<Edge> edges{Edge{0, 1, Rational(1), Rational(7, 3), fd},
                          Edge{1, 2, Rational(1), Rational(11, 7), fd}};
  Instance inst;
  inst.network = std::make_shared<const RoadNetwork>(nodes, edges);
  inst.max_wait = Rational(0);
  inst.vehicles = {vehicle(0, 0, 2, Rational(1, 3), Rational(100))};
  std::vector<LinkState> links;
  Plan plan = simulate_opportunistic(inst, {}, &links);
  CHECK(plan.vehicles[0].entry_times[1] == Rational(1, 3) + Rational(7, 3));
  REQUIRE(links[1].exits.size() == 1);
  CHECK(links[1].exits[0].time_min == Rational(1, 3) + Rational(7, 3) + Rational(11, 7));
}

TEST_CASE("deadline-bound vehicles fall back to a faster admissible route") {
  // cheapest route too slow for the deadline; detour within budget exists
  std::vector<NodeId> nodes{0, 1, 2, 3};
  std::vector<Edge> edges{
      Edge{0, 1, Rational(1), Rational(20), {}},
      Edge{1, 3, Rational(1), Rational(20), {}},
      Edge{0, 2, Rational(1), Rational(1), {}},
      Edge{2, 3, Rational(11, 10), Rational(1), {}},
  };
  Instance inst;
  inst.network = std::make_shared<const RoadNetwork>(nodes, edges);
  inst.max_wait = Rational(0);
  inst.vehicles = {vehicle(0, 0, 3, Rational(0), Rational(5))};
  Plan plan = simulate_opportunistic(inst);
  CHECK(plan.objective == Rational(21, 10));
  CHECK(route_nodes(inst.net(), plan.vehicles[0]) == std::vector<NodeId>{0, 2, 3});
}

TEST_CASE("finite capacity spaces simultaneous exits by the headway") {
  Instance inst;
  inst.network = line_net(1);
  inst.max_wait = Rational(0);
  inst.vehicles = {vehicle(0, 0, 1, Rational(0), Rational(10)),
                   vehicle(1, 0, 1, Rational(0), Rational(10))};
  AdhocConfig cfg;
  cfg.congestion = true;
  std::vector<LinkState> links;
  Plan plan = simulate_opportunistic(inst, cfg, &links);
  REQUIRE(links[0].exits.size() == 2);
  CHECK(links[0].exits[0].time_min == Rational(1));
  // both entrants platoon, so the discharge headway uses the boosted capacity
  CHECK(links[0].effective_capacity_veh_h == Rational(4000));
  CHECK(links[0].exits[1].time_min == Rational(1) + Rational(60) / Rational(4000));
  REQUIRE(links[0].platoon_runs.size() == 1);
  CHECK(links[0].platoon_runs[0] == std::vector<int>{0, 1});
  CHECK(plan.platoons.size() == 1);  // entries still coincide
}

TEST_CASE("exit order equals entry order on randomized sequences") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> minute(0, 30);
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst;
    inst.network = line_net(2);
    inst.max_wait = Rational(0);
    const int n = 8;
    for (int i = 0; i < n; ++i) {
      inst.vehicles.push_back(vehicle(i, 0, 2, Rational(minute(rng)), Rational(1000)));
    }
    AdhocConfig cfg;
    cfg.congestion = true;
    std::vector<LinkState> links;
    simulate_opportunistic(inst, cfg, &links);
    for (const LinkState& link : links) {
      REQUIRE(link.exits.size() == link.entries.size());
      for (std::size_t k = 0; k + 1 < link.exits.size(); ++k) {
        CHECK(link.exits[k].vehicle < link.exits[k + 1].vehicle);
        CHECK(link.exits[k].time_min <= link.exits[k + 1].time_min);
        CHECK(link.entries[k].time_min <= link.entries[k + 1].time_min);
      }
    }
  }
}

TEST_CASE("simulation config is validated") {
  Instance inst;
  inst.network = line_net(1);
  inst.max_wait = Rational(0);
  inst.vehicles = {vehicle(0, 0, 1, Rational(0), Rational(10))};
  AdhocConfig cfg;
  cfg.headway_delta = Rational(-1);
  CHECK_THROWS_AS(simulate_opportunistic(inst, cfg), ValidationError);
  cfg = AdhocConfig{};
  cfg.factors.rows.clear();
  CHECK_THROWS_AS(simulate_opportunistic(inst, cfg), ValidationError);
}
