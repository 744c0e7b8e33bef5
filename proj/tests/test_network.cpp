#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "platoon/network.hpp"

using namespace platoon;

namespace {

// Independent all-simple-paths enumerator used as a reference for
// bounded_paths: no pruning, no ordering tricks, just raw DFS.
void enumerate_paths(const RoadNetwork& net, NodeId at, NodeId dest, std::vector<NodeId>& nodes,
                     std::set<NodeId>& used, std::vector<std::vector<NodeId>>& out) {
  if (at == dest) {
    out.push_back(nodes);
    return;
  }
  for (int ei : net.out_edges(at)) {
    NodeId to = net.edges()[ei].to;
    if (used.count(to)) continue;
    used.insert(to);
    nodes.push_back(to);
    enumerate_paths(net, to, dest, nodes, used, out);
    nodes.pop_back();
    used.erase(to);
  }
}

std::vector<std::vector<NodeId>> all_simple_paths(const RoadNetwork& net, NodeId o, NodeId d) {
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> nodes{o};
  std::set<NodeId> used{o};
  enumerate_paths(net, o, d, nodes, used, out);
  return out;
}

Rational path_cost(const RoadNetwork& net, const std::vector<NodeId>& nodes) {
  Rational c = 0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    c = c + net.edges()[net.edge_index(nodes[i], nodes[i + 1])].cost;
  return c;
}

}  // namespace

TEST_CASE("grid generator produces the lattice") {
  auto g = make_grid(10, 10, Rational(1), Rational(1));
  CHECK(g.nodes().size() == 100);
  CHECK(g.edges().size() == 360);

  auto tiny = make_grid(1, 1, Rational(1), Rational(1));
  CHECK(tiny.nodes().size() == 1);
  CHECK(tiny.edges().size() == 0);

  auto small = make_grid(2, 2, Rational(1), Rational(1));
  CHECK(small.nodes().size() == 4);
  CHECK(small.edges().size() == 8);

  CHECK_THROWS_AS(make_grid(0, 3, Rational(1), Rational(1)), ValidationError);
  CHECK_THROWS_AS(make_grid(3, -1, Rational(1), Rational(1)), ValidationError);
}

TEST_CASE("network validation rejects malformed edges") {
  std::vector<NodeId> nodes{0, 1};
  FundamentalDiagram fd;
  CHECK_THROWS_AS(RoadNetwork(nodes, {Edge{0, 0, Rational(1), Rational(1), fd}}),
                  ValidationError);  // self loop
  CHECK_THROWS_AS(RoadNetwork(nodes, {Edge{0, 1, Rational(-1), Rational(1), fd}}),
                  ValidationError);  // negative cost
  CHECK_THROWS_AS(RoadNetwork(nodes, {Edge{0, 1, Rational(1), Rational(0), fd}}),
                  ValidationError);  // zero traversal time
  CHECK_THROWS_AS(RoadNetwork(nodes, {Edge{0, 2, Rational(1), Rational(1), fd}}),
                  ValidationError);  // unknown endpoint
  CHECK_THROWS_AS(RoadNetwork(nodes,
                              {Edge{0, 1, Rational(1), Rational(1), fd},
                               Edge{0, 1, Rational(2), Rational(1), fd}}),
                  ValidationError);  // duplicate edge
}

TEST_CASE("shortest_path on the grid") {
  auto g = make_grid(10, 10, Rational(1), Rational(1));
  SUBCASE("straight line") {
    auto p = shortest_path(g, 0, 3);
    CHECK(p.total_cost == Rational(3));
    CHECK(p.nodes == std::vector<NodeId>{0, 1, 2, 3});
  }
  SUBCASE("manhattan distance") {
    auto p = shortest_path(g, 0, 22);
    CHECK(p.total_cost == Rational(4));
  }
  SUBCASE("deterministic and lexicographically smallest") {
    auto a = shortest_path(g, 0, 22);
    auto b = shortest_path(g, 0, 22);
    CHECK(a.edge_indices == b.edge_indices);
    // Among all cost-4 node sequences 0->22 the smallest is 0,1,2,12,22.
    CHECK(a.nodes == std::vector<NodeId>{0, 1, 2, 12, 22});
  }
}

TEST_CASE("shortest_path signals unreachable destinations") {
  std::vector<NodeId> nodes{0, 1, 2};
  FundamentalDiagram fd;
  RoadNetwork net(nodes, {Edge{0, 1, Rational(1), Rational(1), fd}});
  CHECK_THROWS_AS(shortest_path(net, 0, 2), NoPathError);
  try {
    shortest_path(net, 0, 2);
  } catch (const NoPathError& e) {
    CHECK(e.origin == 0);
    CHECK(e.dest == 2);
  }
}

TEST_CASE("count_shortest_grid_paths is the binomial coefficient") {
  CHECK(count_shortest_grid_paths(2, 2) == 6);
  CHECK(count_shortest_grid_paths(0, 5) == 1);
  CHECK(count_shortest_grid_paths(5, 0) == 1);
  CHECK(count_shortest_grid_paths(3, 3) == 20);
  CHECK(count_shortest_grid_paths(9, 9) == 48620);
  CHECK(count_shortest_grid_paths(0, 0) == 1);
}

TEST_CASE("bounded_paths examples on the grid") {
  auto g = make_grid(10, 10, Rational(1), Rational(1));
  SUBCASE("tight detour budget keeps only the straight path") {
    auto ps = bounded_paths(g, 0, 2, Rational(10, 9));
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].total_cost == Rational(2));
    CHECK(ps[0].nodes == std::vector<NodeId>{0, 1, 2});
  }
  SUBCASE("factor one keeps exactly the shortest paths") {
    auto ps = bounded_paths(g, 0, 11, Rational(1));
    CHECK(ps.size() == 2);  // the two Manhattan routes
    for (const auto& p : ps) CHECK(p.total_cost == Rational(2));
  }
  SUBCASE("factor one with a unique shortest path") {
    auto ps = bounded_paths(g, 0, 3, Rational(1));
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].nodes == std::vector<NodeId>{0, 1, 2, 3});
  }
}

TEST_CASE("bounded_paths agrees with raw enumeration on a weighted graph") {
  std::vector<NodeId> nodes{0, 1, 2, 3};
  FundamentalDiagram fd;
  RoadNetwork net(nodes, {
                             Edge{0, 1, Rational(1), Rational(1), fd},
                             Edge{0, 2, Rational(2), Rational(1), fd},
                             Edge{1, 2, Rational(1), Rational(1), fd},
                             Edge{1, 3, Rational(1), Rational(1), fd},
                             Edge{2, 3, Rational(1), Rational(1), fd},
                         });
  for (Rational factor : {Rational(1), Rational(3, 2), Rational(2), Rational(5)}) {
    auto got = bounded_paths(net, 0, 3, factor);
    Rational budget = factor * shortest_path(net, 0, 3).total_cost;
    std::vector<std::vector<NodeId>> want;
    for (auto& nodeseq : all_simple_paths(net, 0, 3))
      if (path_cost(net, nodeseq) <= budget) want.push_back(nodeseq);
    std::vector<std::vector<NodeId>> got_nodes;
    for (auto& p : got) got_nodes.push_back(p.nodes);
    std::sort(want.begin(), want.end());
    std::sort(got_nodes.begin(), got_nodes.end());
    CHECK(got_nodes == want);
    // And every member costs at least the shortest-path cost.
    for (const auto& p : got) CHECK(p.total_cost >= shortest_path(net, 0, 3).total_cost);
  }
}

TEST_CASE("bounded_paths is ordered by cost then node sequence") {
  auto g = make_grid(3, 3, Rational(1), Rational(1));
  auto ps = bounded_paths(g, 0, 8, Rational(2));
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    bool cost_le = ps[i].total_cost < ps[i + 1].total_cost ||
                   (ps[i].total_cost == ps[i + 1].total_cost && ps[i].nodes < ps[i + 1].nodes);
    CHECK(cost_le);
  }
}

TEST_CASE("corner-to-corner shortest-path count matches the closed form") {
  for (int rows = 1; rows <= 5; ++rows)
    for (int cols = 1; cols <= 5; ++cols) {
      auto g = make_grid(rows, cols, Rational(1), Rational(1));
      auto ps = bounded_paths(g, 0, rows * cols - 1, Rational(1));
      CHECK(static_cast<long long>(ps.size()) == count_shortest_grid_paths(rows - 1, cols - 1));
    }
}
