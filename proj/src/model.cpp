#include "platoon/model.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>
#include <tuple>

namespace platoon {

namespace {

// Nondominated (cost, time) pairs reachable at a node, sorted by ascending
// cost; times strictly decrease along the vector.
struct Frontier {
  std::vector<std::pair<Rational, Rational>> labels;

  // Fastest continuation affordable within rem: the label with the largest
  // cost <= rem has the smallest time. Returns false when nothing fits.
  bool min_time_within(const Rational& rem, Rational& out) const {
    const std::pair<Rational, Rational>* best = nullptr;
    for (const auto& l : labels) {
      if (l.first > rem) break;
      best = &l;
    }
    if (!best) return false;
    out = best->second;
    return true;
  }
};

// Biobjective Dijkstra. Labels pop in lexicographic (cost, time) order, so
// a popped label is nondominated iff its time beats every label already
// accepted at its node. reverse == true explores incoming edges (distances
// toward `source` instead of from it).
std::vector<Frontier> pareto_frontiers(const RoadNetwork& net, NodeId source,
                                       const Rational& cost_cap, const Rational& time_cap,
                                       bool reverse) {
  std::unordered_map<NodeId, std::size_t> pos;
  pos.reserve(net.node_count());
  for (std::size_t i = 0; i < net.node_count(); ++i) pos[net.nodes()[i]] = i;

  std::vector<Frontier> front(net.node_count());
  using Item = std::tuple<Rational, Rational, NodeId>;
  auto cmp = [](const Item& a, const Item& b) { return b < a; };  // min-heap
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
  pq.emplace(Rational(0), Rational(0), source);

  while (!pq.empty()) {
    auto [c, t, u] = pq.top();
    pq.pop();
    Frontier& f = front[pos[u]];
    if (!f.labels.empty() && f.labels.back().second <= t) continue;  // dominated
    f.labels.emplace_back(c, t);
    for (int ei : (reverse ? net.in_edges(u) : net.out_edges(u))) {
      const Edge& e = net.edge(ei);
      NodeId next = reverse ? e.from : e.to;
      Rational nc = c + e.cost;
      Rational nt = t + e.time_min;
      if (nc > cost_cap || nt > time_cap) continue;
      const Frontier& g = front[pos[next]];
      if (!g.labels.empty() && g.labels.back().first <= nc && g.labels.back().second <= nt)
        continue;  // already dominated, skip the queue churn
      pq.emplace(nc, nt, next);
    }
  }
  return front;
}

}  // namespace

CoordinationModel CoordinationModel::build(const Instance& inst) {
  CoordinationModel m;
  m.inst_ = inst;
  const RoadNetwork& net = inst.net();
  const Rational bound_factor = Rational(1) / (Rational(1) - inst.eta);

  std::unordered_map<NodeId, std::size_t> pos;
  pos.reserve(net.node_count());
  for (std::size_t i = 0; i < net.node_count(); ++i) pos[net.nodes()[i]] = i;

  m.vehicles_.resize(inst.vehicles.size());
  for (std::size_t vi = 0; vi < inst.vehicles.size(); ++vi) {
    const Vehicle& v = inst.vehicles[vi];
    VehicleVariables& vars = m.vehicles_[vi];
    vars.vehicle_pos = static_cast<int>(vi);

    auto costs = min_costs_from(net, v.origin);
    auto dit = costs.find(v.dest);
    if (dit == costs.end()) continue;  // unreachable: no variables at all
    vars.shortest_cost = dit->second;
    const Rational budget = vars.shortest_cost * bound_factor;
    const Rational window = v.deadline - v.earliest_departure;

    auto fwd = pareto_frontiers(net, v.origin, budget, window, false);
    auto bwd = pareto_frontiers(net, v.dest, budget, window, true);

    {
      const Frontier& at_dest = fwd[pos[v.dest]];
      if (at_dest.labels.empty()) continue;  // no route fits cost and time together
      vars.shortest_time = at_dest.labels.back().second;
    }

    // An edge carries a flow variable when some prefix label and suffix
    // label combine into a route within both caps. The window then runs
    // from the fastest undelayed entry to the latest entry that still
    // reaches the destination by the deadline.
    for (std::size_t ei = 0; ei < net.edges().size(); ++ei) {
      const Edge& e = net.edges()[ei];
      const Frontier& in = fwd[pos[e.from]];
      const Frontier& out = bwd[pos[e.to]];
      if (in.labels.empty() || out.labels.empty()) continue;

      bool usable = false;
      Rational t1min, t2min;
      for (const auto& [c1, t1] : in.labels) {
        Rational rem = budget - c1 - e.cost;
        if (rem < Rational(0)) break;  // costs ascend; later labels only worse
        Rational t2;
        if (!out.min_time_within(rem, t2)) continue;
        if (t1 + e.time_min + t2 > window) continue;
        if (!usable || t1 < t1min) t1min = t1;
        usable = true;
      }
      if (!usable) continue;
      bool have_suffix = false;
      for (const auto& [c2, t2] : out.labels) {
        Rational rem = budget - c2 - e.cost;
        if (rem < Rational(0)) break;
        Rational t1;
        if (!in.min_time_within(rem, t1)) continue;
        if (t1 + e.time_min + t2 > window) continue;
        if (!have_suffix || t2 < t2min) t2min = t2;
        have_suffix = true;
      }
      // The witness pair behind `usable` is feasible both ways.
      if (!have_suffix) continue;
      Rational lo = v.earliest_departure + t1min;
      Rational hi = v.deadline - e.time_min - t2min;
      vars.edge_windows.emplace(static_cast<int>(ei), EntryWindow{lo, hi});
    }
    m.flow_count_ += vars.edge_windows.size();
  }

  // Follow variables exist in both directions when the pair can co-traverse.
  for (std::size_t vi = 0; vi < m.vehicles_.size(); ++vi) {
    if (!inst.vehicles[vi].platoon_capable) continue;
    for (std::size_t wi = vi + 1; wi < m.vehicles_.size(); ++wi) {
      if (!inst.vehicles[wi].platoon_capable) continue;
      const auto& a = m.vehicles_[vi].edge_windows;
      const auto& b = m.vehicles_[wi].edge_windows;
      const auto& small = a.size() <= b.size() ? a : b;
      const auto& large = a.size() <= b.size() ? b : a;
      for (const auto& [e, win] : small) {
        auto it = large.find(e);
        if (it == large.end() || !win.overlaps(it->second)) continue;
        int v = static_cast<int>(vi), w = static_cast<int>(wi);
        m.follows_.insert(follow_key(v, w, e));
        m.follows_.insert(follow_key(w, v, e));
        m.partners_[(static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)) << 20) |
                    static_cast<std::uint32_t>(e)]
            .push_back(w);
        m.partners_[(static_cast<std::uint64_t>(static_cast<std::uint32_t>(w)) << 20) |
                    static_cast<std::uint32_t>(e)]
            .push_back(v);
      }
    }
  }
  for (auto& [k, list] : m.partners_) std::sort(list.begin(), list.end());
  return m;
}

const std::vector<int>& CoordinationModel::follow_partners(int v_pos, int edge_index) const {
  static const std::vector<int> empty;
  auto it = partners_.find((static_cast<std::uint64_t>(static_cast<std::uint32_t>(v_pos)) << 20) |
                           static_cast<std::uint32_t>(edge_index));
  return it == partners_.end() ? empty : it->second;
}

Rational objective_value(const CoordinationModel& model, const Assignment& a) {
  const Instance& inst = model.instance();
  const RoadNetwork& net = inst.net();
  if (a.vehicles.size() != model.vehicles().size()) {
    throw ModelMismatchError("assignment covers " + std::to_string(a.vehicles.size()) +
                             " vehicles, model has " + std::to_string(model.vehicles().size()));
  }
  Rational total = 0;
  for (std::size_t vi = 0; vi < a.vehicles.size(); ++vi) {
    for (const auto& [e, entry] : a.vehicles[vi].edge_entries) {
      if (!model.has_flow(static_cast<int>(vi), e)) {
        throw ModelMismatchError("no flow variable for vehicle " +
                                 std::to_string(inst.vehicles[vi].id) + " on edge " +
                                 std::to_string(e));
      }
      total = total + net.edges()[e].cost;
    }
    total = total + inst.vehicle_wait_cost(inst.vehicles[vi]) * a.vehicles[vi].delay;
  }
  for (const auto& q : a.follows) {
    if (!model.has_follow(q.follower_pos, q.leader_pos, q.edge_index)) {
      throw ModelMismatchError("no follow variable for vehicles " +
                               std::to_string(inst.vehicles[q.follower_pos].id) + "," +
                               std::to_string(inst.vehicles[q.leader_pos].id) + " on edge " +
                               std::to_string(q.edge_index));
    }
    total = total - inst.eta * net.edges()[q.edge_index].cost;
  }
  return total;
}

std::string to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::unknown_flow: return "unknown-flow";
    case Violation::Kind::unknown_follow: return "unknown-follow";
    case Violation::Kind::route_broken: return "route-broken";
    case Violation::Kind::departure_mismatch: return "departure-mismatch";
    case Violation::Kind::delay_out_of_bounds: return "delay-out-of-bounds";
    case Violation::Kind::progression_mismatch: return "progression-mismatch";
    case Violation::Kind::deadline_missed: return "deadline-missed";
    case Violation::Kind::follow_without_flow: return "follow-without-flow";
    case Violation::Kind::sync_mismatch: return "sync-mismatch";
    case Violation::Kind::multiple_follow: return "multiple-follow";
    case Violation::Kind::leader_missing: return "leader-missing";
  }
  return "unknown";
}

std::vector<Violation> check_feasibility(const CoordinationModel& model, const Assignment& a) {
  const Instance& inst = model.instance();
  const RoadNetwork& net = inst.net();
  if (a.vehicles.size() != model.vehicles().size()) {
    throw ModelMismatchError("assignment covers " + std::to_string(a.vehicles.size()) +
                             " vehicles, model has " + std::to_string(model.vehicles().size()));
  }
  std::vector<Violation> out;
  auto add = [&out](Violation::Kind k, int vehicle, int other, int edge, std::string detail) {
    out.push_back(Violation{k, vehicle, other, edge, std::move(detail)});
  };

  // Per-vehicle entry lookup for the platoon checks below.
  std::vector<std::unordered_map<int, Rational>> entry_of(a.vehicles.size());

  for (std::size_t vi = 0; vi < a.vehicles.size(); ++vi) {
    const Vehicle& v = inst.vehicles[vi];
    const auto& av = a.vehicles[vi];

    for (const auto& [e, entry] : av.edge_entries) {
      if (!model.has_flow(static_cast<int>(vi), e))
        add(Violation::Kind::unknown_flow, v.id, -1, e, "edge outside the generated variables");
      entry_of[vi].emplace(e, entry);
    }

    if (av.delay < Rational(0) || av.delay > inst.max_wait)
      add(Violation::Kind::delay_out_of_bounds, v.id, -1, -1,
          "delay " + av.delay.str() + " outside [0, " + inst.max_wait.str() + "]");

    // Route structure: order active edges by entry time and require a simple
    // origin->destination chain with no waiting at intermediate nodes.
    auto edges = av.edge_entries;
    std::sort(edges.begin(), edges.end(),
              [](const auto& x, const auto& y) { return x.second < y.second; });
    if (edges.empty()) {
      add(Violation::Kind::route_broken, v.id, -1, -1, "no active edges");
      continue;
    }
    bool chain_ok = true;
    std::unordered_set<NodeId> visited;
    visited.insert(net.edges()[edges[0].first].from);
    for (std::size_t k = 0; k < edges.size() && chain_ok; ++k) {
      const Edge& e = net.edges()[edges[k].first];
      if (k > 0 && e.from != net.edges()[edges[k - 1].first].to) {
        add(Violation::Kind::route_broken, v.id, -1, edges[k].first,
            "edge does not continue from the previous one");
        chain_ok = false;
      } else if (!visited.insert(e.to).second) {
        add(Violation::Kind::route_broken, v.id, -1, edges[k].first, "route revisits a node");
        chain_ok = false;
      }
    }
    if (!chain_ok) continue;
    if (net.edges()[edges.front().first].from != v.origin ||
        net.edges()[edges.back().first].to != v.dest) {
      add(Violation::Kind::route_broken, v.id, -1, -1,
          "active edges do not run origin to destination");
      continue;
    }

    if (edges.front().second != v.earliest_departure + av.delay)
      add(Violation::Kind::departure_mismatch, v.id, -1, edges.front().first,
          "first entry " + edges.front().second.str() + " != departure " +
              (v.earliest_departure + av.delay).str());
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      Rational expect = edges[k].second + net.edges()[edges[k].first].time_min;
      if (edges[k + 1].second != expect)
        add(Violation::Kind::progression_mismatch, v.id, -1, edges[k + 1].first,
            "entry " + edges[k + 1].second.str() + " != " + expect.str());
    }
    Rational arrival = edges.back().second + net.edges()[edges.back().first].time_min;
    if (arrival > v.deadline)
      add(Violation::Kind::deadline_missed, v.id, -1, -1,
          "arrival " + arrival.str() + " > deadline " + v.deadline.str());
  }

  // Platoon checks: every follow needs both flows active with equal entries.
  std::map<int, std::vector<const Assignment::Follow*>> by_edge;
  for (const auto& q : a.follows) {
    int vid = inst.vehicles[q.follower_pos].id;
    int wid = inst.vehicles[q.leader_pos].id;
    if (!model.has_follow(q.follower_pos, q.leader_pos, q.edge_index)) {
      add(Violation::Kind::unknown_follow, vid, wid, q.edge_index,
          "follow outside the generated variables");
      continue;
    }
    auto ev = entry_of[q.follower_pos].find(q.edge_index);
    auto ew = entry_of[q.leader_pos].find(q.edge_index);
    if (ev == entry_of[q.follower_pos].end() || ew == entry_of[q.leader_pos].end()) {
      add(Violation::Kind::follow_without_flow, vid, wid, q.edge_index,
          "follow active but a flow variable is not");
      continue;
    }
    if (ev->second != ew->second) {
      add(Violation::Kind::sync_mismatch, vid, wid, q.edge_index,
          "entries " + ev->second.str() + " and " + ew->second.str() + " differ");
      continue;
    }
    by_edge[q.edge_index].push_back(&q);
  }

  // Leader structure per edge: at most one follow per vehicle, and every
  // connected follow group needs one member that follows nobody.
  for (const auto& [e, qs] : by_edge) {
    std::map<int, int> leader_of;  // follower pos -> leader pos
    bool dup = false;
    for (const auto* q : qs) {
      auto [it, inserted] = leader_of.emplace(q->follower_pos, q->leader_pos);
      if (!inserted && it->second != q->leader_pos) {
        add(Violation::Kind::multiple_follow, inst.vehicles[q->follower_pos].id,
            inst.vehicles[q->leader_pos].id, e, "vehicle follows two leaders on one edge");
        dup = true;
      }
    }
    if (dup) continue;
    // Union members into groups, then look for a follow-nobody member.
    std::map<int, int> root;
    std::function<int(int)> find = [&](int x) {
      auto it = root.find(x);
      if (it == root.end() || it->second == x) return x;
      return it->second = find(it->second);
    };
    for (const auto* q : qs) {
      root.try_emplace(q->follower_pos, q->follower_pos);
      root.try_emplace(q->leader_pos, q->leader_pos);
      root[find(q->follower_pos)] = find(q->leader_pos);
    }
    std::map<int, std::vector<int>> groups;
    for (const auto& [member, _] : root) groups[find(member)].push_back(member);
    for (const auto& [_, members] : groups) {
      bool has_leader = false;
      for (int m : members) has_leader |= leader_of.find(m) == leader_of.end();
      if (!has_leader)
        add(Violation::Kind::leader_missing, inst.vehicles[members.front()].id, -1, e,
            "every platoon member follows someone");
    }
  }
  return out;
}

Assignment assignment_from_plan(const CoordinationModel& model, const Plan& plan) {
  const Instance& inst = model.instance();
  Assignment a;
  a.vehicles.resize(inst.vehicles.size());
  std::unordered_map<int, int> pos_of;
  for (std::size_t vi = 0; vi < inst.vehicles.size(); ++vi)
    pos_of[inst.vehicles[vi].id] = static_cast<int>(vi);

  for (const auto& vp : plan.vehicles) {
    auto it = pos_of.find(vp.vehicle_id);
    if (it == pos_of.end())
      throw ModelMismatchError("plan vehicle " + std::to_string(vp.vehicle_id) +
                               " not in the instance");
    if (vp.route_edges.size() != vp.entry_times.size())
      throw ModelMismatchError("vehicle " + std::to_string(vp.vehicle_id) +
                               " has mismatched route and entry lists");
    auto& av = a.vehicles[it->second];
    av.delay = vp.delay;
    for (std::size_t k = 0; k < vp.route_edges.size(); ++k)
      av.edge_entries.emplace_back(vp.route_edges[k], vp.entry_times[k]);
  }
  for (const auto& g : plan.platoons) {
    if (g.vehicle_ids.size() < 2) continue;
    int leader = pos_of.at(g.vehicle_ids.front());  // ids sorted, smallest leads
    for (std::size_t k = 1; k < g.vehicle_ids.size(); ++k)
      a.follows.push_back(Assignment::Follow{pos_of.at(g.vehicle_ids[k]), leader, g.edge_index});
  }
  return a;
}

void write_lp(const CoordinationModel& model, std::ostream& os) {
  const Instance& inst = model.instance();
  const RoadNetwork& net = inst.net();

  // Big-M spanning every admissible entry-time difference.
  Rational lo = 0, hi = 0;
  bool first = true;
  for (const auto& v : inst.vehicles) {
    if (first || v.earliest_departure < lo) lo = v.earliest_departure;
    if (first || v.deadline > hi) hi = v.deadline;
    first = false;
  }
  const Rational big_m = hi - lo + Rational(1);

  auto fvar = [&](int v, int e) {
    return "f_" + std::to_string(inst.vehicles[v].id) + "_e" + std::to_string(e);
  };
  auto qvar = [&](int v, int w, int e) {
    return "q_" + std::to_string(inst.vehicles[v].id) + "_" + std::to_string(inst.vehicles[w].id) +
           "_e" + std::to_string(e);
  };
  auto yvar = [&](int v, NodeId n) {
    return "y_" + std::to_string(inst.vehicles[v].id) + "_n" + std::to_string(n);
  };
  auto tvar = [&](int v) { return "t_" + std::to_string(inst.vehicles[v].id); };
  auto num = [](const Rational& r) {
    return r.is_integer() ? r.str() : std::to_string(r.to_double());
  };

  os << "\\ coordinated platooning model\n";
  os << "\\ f: vehicle uses edge, q: follower pairing, t: departure delay,\n";
  os << "\\ y: node entry time (edge entry = entry at its tail node)\n";
  os << "Minimize\n obj:";
  for (const auto& vars : model.vehicles()) {
    int v = vars.vehicle_pos;
    for (const auto& [e, win] : vars.edge_windows) {
      os << " + " << num(net.edges()[e].cost) << " " << fvar(v, e);
      for (int w : model.follow_partners(v, e))
        os << " - " << num(inst.eta * net.edges()[e].cost) << " " << qvar(v, w, e);
    }
    Rational eps = inst.vehicle_wait_cost(inst.vehicles[v]);
    if (eps != Rational(0)) os << " + " << num(eps) << " " << tvar(v);
  }
  os << "\nSubject To\n";

  for (const auto& vars : model.vehicles()) {
    int v = vars.vehicle_pos;
    const Vehicle& veh = inst.vehicles[v];
    // Flow conservation over the support of the generated variables.
    std::map<NodeId, std::pair<std::vector<int>, std::vector<int>>> at_node;  // out, in
    for (const auto& [e, win] : vars.edge_windows) {
      at_node[net.edges()[e].from].first.push_back(e);
      at_node[net.edges()[e].to].second.push_back(e);
    }
    for (const auto& [n, inout] : at_node) {
      os << " flow_" << veh.id << "_n" << n << ":";
      for (int e : inout.first) os << " + " << fvar(v, e);
      for (int e : inout.second) os << " - " << fvar(v, e);
      if (n == veh.origin)
        os << " = 1\n";
      else if (n == veh.dest)
        os << " = -1\n";
      else
        os << " = 0\n";
    }
    // Timing: departure, per-edge progression when the edge is used, deadline.
    os << " dep_" << veh.id << ": " << yvar(v, veh.origin) << " - " << tvar(v) << " = "
       << num(veh.earliest_departure) << "\n";
    for (const auto& [e, win] : vars.edge_windows) {
      const Edge& ed = net.edges()[e];
      os << " prog_lo_" << veh.id << "_e" << e << ": " << yvar(v, ed.to) << " - "
         << yvar(v, ed.from) << " + " << num(big_m) << " " << fvar(v, e)
         << " <= " << num(ed.time_min + big_m) << "\n";
      os << " prog_hi_" << veh.id << "_e" << e << ": " << yvar(v, ed.to) << " - "
         << yvar(v, ed.from) << " - " << num(big_m) << " " << fvar(v, e)
         << " >= " << num(ed.time_min - big_m) << "\n";
    }
    os << " ddl_" << veh.id << ": " << yvar(v, veh.dest) << " <= " << num(veh.deadline) << "\n";
  }

  // Follower rules: a follow needs both flows, at most one leader per edge,
  // and synchronized entries.
  for (const auto& vars : model.vehicles()) {
    int v = vars.vehicle_pos;
    for (const auto& [e, win] : vars.edge_windows) {
      const auto& partners = model.follow_partners(v, e);
      if (partners.empty()) continue;
      NodeId tail = net.edges()[e].from;
      os << " one_" << inst.vehicles[v].id << "_e" << e << ":";
      for (int w : partners) os << " + " << qvar(v, w, e);
      os << " - " << fvar(v, e) << " <= 0\n";
      for (int w : partners) {
        os << " use_" << inst.vehicles[v].id << "_" << inst.vehicles[w].id << "_e" << e << ": "
           << qvar(v, w, e) << " - " << fvar(w, e) << " <= 0\n";
        os << " sync_lo_" << inst.vehicles[v].id << "_" << inst.vehicles[w].id << "_e" << e << ": "
           << yvar(v, tail) << " - " << yvar(w, tail) << " + " << num(big_m) << " " << qvar(v, w, e)
           << " <= " << num(big_m) << "\n";
        os << " sync_hi_" << inst.vehicles[v].id << "_" << inst.vehicles[w].id << "_e" << e << ": "
           << yvar(v, tail) << " - " << yvar(w, tail) << " - " << num(big_m) << " " << qvar(v, w, e)
           << " >= -" << num(big_m) << "\n";
      }
    }
  }

  os << "Bounds\n";
  for (const auto& vars : model.vehicles()) {
    int v = vars.vehicle_pos;
    os << " 0 <= " << tvar(v) << " <= " << num(inst.max_wait) << "\n";
    std::map<NodeId, bool> nodes;
    for (const auto& [e, win] : vars.edge_windows) {
      nodes[net.edges()[e].from] = true;
      nodes[net.edges()[e].to] = true;
    }
    for (const auto& [n, _] : nodes) os << " " << yvar(v, n) << " free\n";
  }
  os << "Binaries\n";
  for (const auto& vars : model.vehicles()) {
    int v = vars.vehicle_pos;
    for (const auto& [e, win] : vars.edge_windows) {
      os << " " << fvar(v, e);
      for (int w : model.follow_partners(v, e)) os << " " << qvar(v, w, e);
    }
    os << "\n";
  }
  os << "End\n";
}

}  // namespace platoon
