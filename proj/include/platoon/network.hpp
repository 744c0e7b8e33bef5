#ifndef PLATOON_NETWORK_HPP
#define PLATOON_NETWORK_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "platoon/rational.hpp"

namespace platoon {

using NodeId = std::int32_t;

struct NoPathError : std::runtime_error {
  NoPathError(NodeId origin, NodeId dest)
      : std::runtime_error("no path from node " + std::to_string(origin) + " to node " +
                           std::to_string(dest)),
        origin(origin),
        dest(dest) {}
  NodeId origin;
  NodeId dest;
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Flow-density relation parameters of a road link.
struct FundamentalDiagram {
  Rational free_flow_speed_kmh = 60;   // u
  Rational shockwave_speed_kmh = 20;   // w
  Rational jam_density_veh_km = 150;   // rho_jam
  Rational base_capacity_veh_h = 2200;

  friend bool operator==(const FundamentalDiagram&, const FundamentalDiagram&) = default;
};

struct Edge {
  NodeId from = -1;
  NodeId to = -1;
  Rational cost;          // fuel units
  Rational time_min;      // free-flow traversal time
  FundamentalDiagram fd;

  // Link length implied by free-flow speed and traversal time.
  Rational length_km() const { return fd.free_flow_speed_kmh * time_min / Rational(60); }

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Immutable directed road network. Construct once, share freely.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<NodeId> nodes, std::vector<Edge> edges);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_node(NodeId n) const { return node_pos_.count(n) > 0; }

  // Index into edges() for (from,to), or -1 when absent.
  int edge_index(NodeId from, NodeId to) const;

  const Edge& edge(int index) const { return edges_.at(static_cast<std::size_t>(index)); }

  // Outgoing edge indices of a node, sorted by head node id.
  const std::vector<int>& out_edges(NodeId n) const;
  // Incoming edge indices of a node, sorted by tail node id.
  const std::vector<int>& in_edges(NodeId n) const;

  friend bool operator==(const RoadNetwork& a, const RoadNetwork& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<NodeId> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, std::size_t> node_pos_;
  std::unordered_map<std::int64_t, int> edge_pos_;  // (from,to) key -> edge index
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;

  static std::int64_t pair_key(NodeId from, NodeId to) {
    return (static_cast<std::int64_t>(from) << 32) | static_cast<std::uint32_t>(to);
  }
};

// Edge sequence with cached totals. Nodes are the visited node ids, so
// nodes.size() == edge_indices.size() + 1.
struct Path {
  std::vector<int> edge_indices;
  std::vector<NodeId> nodes;
  Rational total_cost;
  Rational total_time;

  friend bool operator==(const Path&, const Path&) = default;
};

// rows x cols lattice with two opposing directed edges between neighbors.
// Node (r,c) gets id r*cols + c. All edges share the given cost, traversal
// time and fundamental diagram.
RoadNetwork make_grid(int rows, int cols, const Rational& edge_cost, const Rational& edge_time,
                      const FundamentalDiagram& fd = FundamentalDiagram{});

// Minimum-cost path under edge cost. Among equal-cost paths returns the
// lexicographically smallest node sequence, so repeated calls are identical.
// Throws NoPathError when dest is unreachable.
Path shortest_path(const RoadNetwork& net, NodeId origin, NodeId dest);

// Number of shortest paths between opposite corners of an (m+1)x(n+1)
// lattice: binomial(m+n, n).
std::int64_t count_shortest_grid_paths(int m, int n);

// Every simple path with total cost <= bound_factor * shortest cost,
// ordered by (total cost, node sequence). bound_factor must be >= 1.
// max_paths == 0 enumerates everything; otherwise the search stops after
// that many paths and *truncated (if given) reports whether any were cut.
std::vector<Path> bounded_paths(const RoadNetwork& net, NodeId origin, NodeId dest,
                                const Rational& bound_factor, std::size_t max_paths = 0,
                                bool* truncated = nullptr);

// Single-source minimum path costs (Dijkstra); unreachable nodes absent.
std::unordered_map<NodeId, Rational> min_costs_from(const RoadNetwork& net, NodeId source);
// Minimum path costs into dest over the reversed graph.
std::unordered_map<NodeId, Rational> min_costs_to(const RoadNetwork& net, NodeId dest);
// Same, over traversal time instead of cost.
std::unordered_map<NodeId, Rational> min_times_to(const RoadNetwork& net, NodeId dest);

// Path built from a node id sequence; validates that every hop is an edge.
Path path_from_nodes(const RoadNetwork& net, const std::vector<NodeId>& nodes);

}  // namespace platoon

#endif  // PLATOON_NETWORK_HPP
