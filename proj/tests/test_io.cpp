#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <memory>
#include <sstream>

#include "platoon/io.hpp"
#include "platoon/solver.hpp"

using namespace platoon;
using nlohmann::json;

namespace {

Instance sample_instance() {
  auto net = std::make_shared<const RoadNetwork>(make_grid(3, 3, Rational(1), Rational(1)));
  Instance inst = generate_case_study(net, 3, DepartureDistribution{}, Rational(5), 7);
  inst.wait_cost_rate = Rational(1, 100);
  inst.vehicles[1].wait_cost = Rational(3, 7);
  inst.vehicles[2].platoon_capable = false;
  return inst;
}

}  // namespace

TEST_CASE("rationals round-trip through json") {
  for (Rational r : {Rational(0), Rational(42), Rational(-3), Rational(57, 10),
                     Rational(-302, 125), Rational(3, 7), Rational(1, 1000000)}) {
    CHECK(rational_from_json(rational_json(r)) == r);
  }
  CHECK(rational_json(Rational(42)).is_number_integer());
  CHECK(rational_json(Rational(57, 10)) == json("5.7"));
  CHECK(rational_json(Rational(3, 7)) == json("3/7"));
  CHECK(rational_from_json(json(0.5)) == Rational(1, 2));
  CHECK(rational_from_json(json::parse("1e-05")) == Rational(1, 100000));
  CHECK_THROWS_AS(rational_from_json(json(true)), ValidationError);
}

TEST_CASE("networks and instances round-trip") {
  Instance inst = sample_instance();
  Instance back = instance_from_json(instance_json(inst));
  CHECK(back.net().nodes() == inst.net().nodes());
  CHECK(back.net().edges() == inst.net().edges());
  REQUIRE(back.vehicles.size() == inst.vehicles.size());
  for (std::size_t i = 0; i < inst.vehicles.size(); ++i) {
    CHECK(back.vehicles[i] == inst.vehicles[i]);
  }
  CHECK(back.max_wait == inst.max_wait);
  CHECK(back.eta == inst.eta);
  CHECK(back.wait_cost_rate == inst.wait_cost_rate);
}

TEST_CASE("plans round-trip bit for bit") {
  Instance inst = sample_instance();
  Plan plan = solve_exact(inst, SolverConfig{});
  Plan back = plan_from_json(plan_json(plan));
  CHECK(back == plan);
  CHECK(plan_json(back).dump() == plan_json(plan).dump());
}

TEST_CASE("factor tables parse two columns with comments") {
  std::istringstream in(
      "# share multiplier\n"
      "0 1\n"
      "0.5 1.4   # mid\n"
      "\n"
      "1 20/11\n");
  CapacityFactorTable table = load_factor_table(in);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[1].first == Rational(1, 2));
  CHECK(table.rows[1].second == Rational(7, 5));
  CHECK(table.rows[2].second == Rational(20, 11));

  std::istringstream bad("0 1\n0.5\n");
  CHECK_THROWS_AS(load_factor_table(bad), ValidationError);
  std::istringstream three("0 1 2\n");
  CHECK_THROWS_AS(load_factor_table(three), ValidationError);
  std::istringstream unsorted("0 1\n0.5 1.2\n0.25 1.1\n");
  CHECK_THROWS_AS(load_factor_table(unsorted), ValidationError);
}

TEST_CASE("a solo trip samples a monotone trajectory") {
  std::vector<NodeId> nodes{0, 1, 2, 3};
  std::vector<Edge> edges{Edge{0, 1, Rational(1), Rational(1), {}},
                          Edge{1, 2, Rational(1), Rational(1), {}},
                          Edge{2, 3, Rational(1), Rational(1), {}}};
  RoadNetwork net(nodes, edges);
  Plan plan;
  plan.status = SolveStatus::optimal;
  VehiclePlan vp;
  vp.vehicle_id = 9;
  vp.route_edges = {0, 1, 2};
  vp.entry_times = {Rational(2), Rational(3), Rational(4)};
  plan.vehicles.push_back(vp);
  plan.objective = Rational(3);

  AnimationTimeline tl = make_timeline(net, plan, Rational(1, 2));
  REQUIRE(tl.frames.size() == 7);  // 2, 2.5, ..., 5
  CHECK(tl.frames.front().time_min == Rational(2));
  CHECK(tl.frames.back().time_min == Rational(5));
  Rational covered;
  for (std::size_t f = 0; f < tl.frames.size(); ++f) {
    REQUIRE(tl.frames[f].vehicles.size() == 1);
    const TimelineSample& s = tl.frames[f].vehicles[0];
    CHECK(s.platoon_group == -1);
    Rational through = Rational(s.edge_index) + s.progress;  // edges in route order
    CHECK(through >= covered);
    covered = through;
  }
  CHECK(covered == Rational(3));  // parked on the final node

  // uneven horizon keeps the exact endpoint
  AnimationTimeline odd = make_timeline(net, plan, Rational(2));
  REQUIRE(odd.frames.size() == 3);
  CHECK(odd.frames.back().time_min == Rational(5));

  CHECK(make_timeline(net, Plan{}, Rational(1)).frames.empty());
  CHECK_THROWS_AS(make_timeline(net, plan, Rational(0)), ValidationError);
}

TEST_CASE("platooned vehicles share tracks and labels") {
  std::vector<NodeId> nodes{0, 1, 2};
  std::vector<Edge> edges{Edge{0, 1, Rational(1), Rational(1), {}},
                          Edge{1, 2, Rational(1), Rational(1), {}}};
  RoadNetwork net(nodes, edges);
  Plan plan;
  plan.status = SolveStatus::optimal;
  for (int id : {0, 1}) {
    VehiclePlan vp;
    vp.vehicle_id = id;
    vp.route_edges = {0, 1};
    vp.entry_times = {Rational(0), Rational(1)};
    plan.vehicles.push_back(vp);
  }
  plan.platoons = {PlatoonGroup{0, Rational(0), {0, 1}},
                   PlatoonGroup{1, Rational(1), {0, 1}}};
  plan.objective = Rational(4) - Rational(2, 10);

  AnimationTimeline tl = make_timeline(net, plan, Rational(1, 2));
  for (const TimelineFrame& f : tl.frames) {
    REQUIRE(f.vehicles.size() == 2);
    CHECK(f.vehicles[0].edge_index == f.vehicles[1].edge_index);
    CHECK(f.vehicles[0].progress == f.vehicles[1].progress);
    CHECK(f.vehicles[0].platoon_group == f.vehicles[1].platoon_group);
    CHECK(f.vehicles[0].platoon_group >= 0);
  }

  // a group naming an absent vehicle is rejected
  plan.platoons[0].vehicle_ids = {0, 7};
  CHECK_THROWS_AS(make_timeline(net, plan, Rational(1)), ValidationError);

  // broken continuity is rejected
  plan.platoons[0].vehicle_ids = {0, 1};
  plan.vehicles[1].entry_times[1] = Rational(2);
  CHECK_THROWS_AS(make_timeline(net, plan, Rational(1)), ValidationError);
}

TEST_CASE("timeline json lists frames in order") {
  std::vector<NodeId> nodes{0, 1};
  std::vector<Edge> edges{Edge{0, 1, Rational(1), Rational(1), {}}};
  RoadNetwork net(nodes, edges);
  Plan plan;
  plan.status = SolveStatus::opportunistic;
  VehiclePlan vp;
  vp.vehicle_id = 0;
  vp.route_edges = {0};
  vp.entry_times = {Rational(0)};
  plan.vehicles.push_back(vp);
  plan.objective = Rational(1);
  json j = timeline_json(make_timeline(net, plan, Rational(1, 2)));
  REQUIRE(j.at("frames").size() == 3);
  CHECK(j.at("frames")[1].at("vehicles")[0].at("progress") == json("0.5"));
}

TEST_CASE("json files save and load") {
  Instance inst = sample_instance();
  auto dir = std::filesystem::temp_directory_path() / "platoon_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "instance.json").string();
  save_json_file(path, instance_json(inst));
  Instance back = instance_from_json(load_json_file(path));
  CHECK(back.vehicles == inst.vehicles);
  CHECK_THROWS_AS(load_json_file((dir / "missing.json").string()), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("metrics reports serialize every column") {
  Instance inst = sample_instance();
  Plan plan = solve_exact(inst, SolverConfig{});
  MetricsReport rep = compute_metrics(inst, plan);
  json j = metrics_json(rep);
  CHECK(j.at("vehicles").size() == rep.vehicles.size());
  CHECK(rational_from_json(j.at("aggregate_vmt_ratio")) == rep.aggregate_vmt_ratio);
  CHECK(rational_from_json(j.at("wait_min").at("mean")) == rep.wait_min.mean);
  CHECK(rational_from_json(j.at("savings_usd").at("max")) == rep.savings_usd.max);
}
