#include "platoon/network.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <set>

namespace platoon {

RoadNetwork::RoadNetwork(std::vector<NodeId> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  for (std::size_t i = 0; i < nodes_.size(); ++i) node_pos_[nodes_[i]] = i;

  out_.resize(nodes_.size());
  in_.resize(nodes_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if (!has_node(ed.from) || !has_node(ed.to)) {
      throw ValidationError("edge references unknown node " +
                            std::to_string(has_node(ed.from) ? ed.to : ed.from));
    }
    if (ed.from == ed.to) {
      throw ValidationError("self-loop at node " + std::to_string(ed.from));
    }
    if (ed.cost < Rational(0)) {
      throw ValidationError("negative cost on edge " + std::to_string(ed.from) + "->" +
                            std::to_string(ed.to));
    }
    if (ed.time_min <= Rational(0)) {
      throw ValidationError("nonpositive traversal time on edge " + std::to_string(ed.from) +
                            "->" + std::to_string(ed.to));
    }
    std::int64_t key = pair_key(ed.from, ed.to);
    if (edge_pos_.count(key)) {
      throw ValidationError("duplicate edge " + std::to_string(ed.from) + "->" +
                            std::to_string(ed.to));
    }
    edge_pos_[key] = static_cast<int>(e);
    out_[node_pos_[ed.from]].push_back(static_cast<int>(e));
    in_[node_pos_[ed.to]].push_back(static_cast<int>(e));
  }
  for (auto& v : out_) {
    std::sort(v.begin(), v.end(),
              [this](int a, int b) { return edges_[a].to < edges_[b].to; });
  }
  for (auto& v : in_) {
    std::sort(v.begin(), v.end(),
              [this](int a, int b) { return edges_[a].from < edges_[b].from; });
  }
}

int RoadNetwork::edge_index(NodeId from, NodeId to) const {
  auto it = edge_pos_.find(pair_key(from, to));
  return it == edge_pos_.end() ? -1 : it->second;
}

const std::vector<int>& RoadNetwork::out_edges(NodeId n) const {
  auto it = node_pos_.find(n);
  if (it == node_pos_.end()) throw ValidationError("unknown node " + std::to_string(n));
  return out_[it->second];
}

const std::vector<int>& RoadNetwork::in_edges(NodeId n) const {
  auto it = node_pos_.find(n);
  if (it == node_pos_.end()) throw ValidationError("unknown node " + std::to_string(n));
  return in_[it->second];
}

RoadNetwork make_grid(int rows, int cols, const Rational& edge_cost, const Rational& edge_time,
                      const FundamentalDiagram& fd) {
  if (rows < 1 || cols < 1) throw ValidationError("grid dimensions must be positive");
  std::vector<NodeId> nodes;
  nodes.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) nodes.push_back(r * cols + c);
  }
  std::vector<Edge> edges;
  auto link = [&](NodeId a, NodeId b) {
    edges.push_back(Edge{a, b, edge_cost, edge_time, fd});
    edges.push_back(Edge{b, a, edge_cost, edge_time, fd});
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      NodeId id = r * cols + c;
      if (c + 1 < cols) link(id, id + 1);
      if (r + 1 < rows) link(id, id + cols);
    }
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

namespace {

std::unordered_map<NodeId, Rational> dijkstra(const RoadNetwork& net, NodeId source, bool reverse,
                                              bool use_time) {
  if (!net.has_node(source)) throw ValidationError("unknown node " + std::to_string(source));
  std::unordered_map<NodeId, Rational> dist;
  using Item = std::pair<Rational, NodeId>;
  auto cmp = [](const Item& a, const Item& b) {
    return a.first > b.first || (a.first == b.first && a.second > b.second);
  };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
  dist[source] = Rational(0);
  pq.push({Rational(0), source});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    auto it = dist.find(u);
    if (it != dist.end() && it->second < d) continue;
    const auto& adj = reverse ? net.in_edges(u) : net.out_edges(u);
    for (int ei : adj) {
      const Edge& e = net.edge(ei);
      NodeId v = reverse ? e.from : e.to;
      Rational nd = d + (use_time ? e.time_min : e.cost);
      auto dit = dist.find(v);
      if (dit == dist.end() || nd < dit->second) {
        dist[v] = nd;
        pq.push({nd, v});
      }
    }
  }
  return dist;
}

}  // namespace

std::unordered_map<NodeId, Rational> min_costs_from(const RoadNetwork& net, NodeId source) {
  return dijkstra(net, source, /*reverse=*/false, /*use_time=*/false);
}

std::unordered_map<NodeId, Rational> min_costs_to(const RoadNetwork& net, NodeId dest) {
  return dijkstra(net, dest, /*reverse=*/true, /*use_time=*/false);
}

std::unordered_map<NodeId, Rational> min_times_to(const RoadNetwork& net, NodeId dest) {
  return dijkstra(net, dest, /*reverse=*/true, /*use_time=*/true);
}

Path path_from_nodes(const RoadNetwork& net, const std::vector<NodeId>& nodes) {
  if (nodes.empty()) throw ValidationError("path needs at least one node");
  Path p;
  p.nodes = nodes;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    int ei = net.edge_index(nodes[i], nodes[i + 1]);
    if (ei < 0) {
      throw ValidationError("no edge " + std::to_string(nodes[i]) + "->" +
                            std::to_string(nodes[i + 1]));
    }
    p.edge_indices.push_back(ei);
    p.total_cost += net.edge(ei).cost;
    p.total_time += net.edge(ei).time_min;
  }
  return p;
}

Path shortest_path(const RoadNetwork& net, NodeId origin, NodeId dest) {
  auto to_dest = min_costs_to(net, dest);
  if (!net.has_node(origin)) throw ValidationError("unknown node " + std::to_string(origin));
  if (!to_dest.count(origin)) throw NoPathError(origin, dest);

  // Greedy walk taking the smallest-id neighbor that stays on a shortest
  // path realizes the lexicographic tie-break. Zero-cost edges can dead-end
  // such a walk, so keep a visited set and backtrack.
  std::vector<NodeId> seq{origin};
  std::set<NodeId> visited{origin};
  std::function<bool(NodeId)> walk = [&](NodeId u) {
    if (u == dest) return true;
    const Rational need = to_dest.at(u);
    for (int ei : net.out_edges(u)) {  // sorted by head id
      const Edge& e = net.edge(ei);
      if (visited.count(e.to)) continue;
      auto it = to_dest.find(e.to);
      if (it == to_dest.end() || e.cost + it->second != need) continue;
      seq.push_back(e.to);
      visited.insert(e.to);
      if (walk(e.to)) return true;
      visited.erase(e.to);
      seq.pop_back();
    }
    return false;
  };
  if (!walk(origin)) throw NoPathError(origin, dest);
  return path_from_nodes(net, seq);
}

std::int64_t count_shortest_grid_paths(int m, int n) {
  if (m < 0 || n < 0) throw ValidationError("grid offsets must be nonnegative");
  std::int64_t k = std::min(m, n);
  __int128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * (m + n - k + i) / i;
    if (acc > INT64_MAX) throw std::overflow_error("count_shortest_grid_paths overflow");
  }
  return static_cast<std::int64_t>(acc);
}

std::vector<Path> bounded_paths(const RoadNetwork& net, NodeId origin, NodeId dest,
                                const Rational& bound_factor, std::size_t max_paths,
                                bool* truncated) {
  if (bound_factor < Rational(1)) throw ValidationError("bound factor must be >= 1");
  if (truncated) *truncated = false;
  auto to_dest = min_costs_to(net, dest);
  if (!net.has_node(origin)) throw ValidationError("unknown node " + std::to_string(origin));
  auto oit = to_dest.find(origin);
  if (oit == to_dest.end()) throw NoPathError(origin, dest);
  const Rational budget = bound_factor * oit->second;

  std::vector<Path> result;
  std::vector<NodeId> stack_nodes{origin};
  std::set<NodeId> on_path{origin};
  Rational cost_so_far(0);

  // Depth-first over simple paths; a partial path dies once even the
  // cheapest completion exceeds the budget. Neighbors are visited in id
  // order so the output is lexicographic within equal cost. Returns false
  // once the cap is hit so the whole search unwinds.
  std::function<bool(NodeId)> dfs = [&](NodeId u) -> bool {
    if (u == dest) {
      // No simple extension can return to dest, so the path is final here.
      if (max_paths && result.size() >= max_paths) {
        if (truncated) *truncated = true;
        return false;
      }
      result.push_back(path_from_nodes(net, stack_nodes));
      return true;
    }
    for (int ei : net.out_edges(u)) {
      const Edge& e = net.edge(ei);
      if (on_path.count(e.to)) continue;
      auto it = to_dest.find(e.to);
      if (it == to_dest.end()) continue;
      Rational lower = cost_so_far + e.cost + it->second;
      if (lower > budget) continue;
      stack_nodes.push_back(e.to);
      on_path.insert(e.to);
      cost_so_far += e.cost;
      bool keep_going = dfs(e.to);
      cost_so_far -= e.cost;
      on_path.erase(e.to);
      stack_nodes.pop_back();
      if (!keep_going) return false;
    }
    return true;
  };
  dfs(origin);

  std::stable_sort(result.begin(), result.end(),
                   [](const Path& a, const Path& b) { return a.total_cost < b.total_cost; });
  return result;
}

}  // namespace platoon
