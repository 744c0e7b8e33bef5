#include "platoon/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace platoon {
namespace {

using Clock = std::chrono::steady_clock;

void validate_config(const SolverConfig& cfg) {
  if (!(cfg.time_limit_s > 0)) throw ValidationError("solver: time limit must be positive");
  if (cfg.resolution <= Rational(0)) {
    throw ValidationError("solver: delay resolution must be positive");
  }
  if (cfg.threads < 1) throw ValidationError("solver: thread count must be positive");
}

// The search loops run on 64-bit ticks: times scaled by a common multiple of
// every time denominator in play, costs likewise. Tick equality is then
// exactly rational equality, and entry times hash cheaply.
struct TickScales {
  std::int64_t time = 1;
  std::int64_t cost = 1;
};

std::int64_t lcm_checked(std::int64_t a, std::int64_t b) {
  __int128 l = static_cast<__int128>(a) / std::gcd(a, b) * b;
  if (l > 1'000'000'000'000'000LL) {
    throw ValidationError("solver: time or cost denominators too fine for 64-bit ticks");
  }
  return static_cast<std::int64_t>(l);
}

std::int64_t to_ticks(const Rational& x, std::int64_t scale) {
  // scale is a common multiple of every denominator fed to the solver
  __int128 v = static_cast<__int128>(x.num()) * (scale / x.den());
  if (v > std::numeric_limits<std::int64_t>::max() / 8 ||
      v < std::numeric_limits<std::int64_t>::min() / 8) {
    throw ValidationError("solver: tick value out of range");
  }
  return static_cast<std::int64_t>(v);
}

TickScales scales_for(const Instance& inst, const Rational& resolution) {
  TickScales s;
  s.time = resolution.den();
  for (const Edge& e : inst.net().edges()) {
    s.time = lcm_checked(s.time, e.time_min.den());
    s.cost = lcm_checked(s.cost, e.cost.den());
    s.cost = lcm_checked(s.cost, (inst.eta * e.cost).den());
  }
  for (const Vehicle& v : inst.vehicles) {
    s.time = lcm_checked(s.time, v.earliest_departure.den());
    s.time = lcm_checked(s.time, v.deadline.den());
    s.cost = lcm_checked(s.cost, (inst.vehicle_wait_cost(v) * resolution).den());
  }
  return s;
}

// Occupancy slot: one (edge, entry time) cell shared by co-timed vehicles.
struct SlotKey {
  int edge = -1;
  std::int64_t tick = 0;
  friend bool operator==(const SlotKey&, const SlotKey&) = default;
};

struct SlotHash {
  std::size_t operator()(const SlotKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.tick) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint32_t>(k.edge) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

using Occupancy = std::unordered_map<SlotKey, int, SlotHash>;

// Per-edge tick tables shared by the heuristic and the exact search.
struct TickContext {
  TickScales sc;
  std::vector<std::int64_t> cost;  // edge cost, cost ticks
  std::vector<std::int64_t> save;  // eta * cost: discount per co-timed entry
  std::vector<std::int64_t> time;  // traversal time, time ticks
};

TickContext make_tick_context(const Instance& inst, const Rational& resolution) {
  TickContext ctx;
  ctx.sc = scales_for(inst, resolution);
  const auto& edges = inst.net().edges();
  ctx.cost.reserve(edges.size());
  ctx.save.reserve(edges.size());
  ctx.time.reserve(edges.size());
  for (const Edge& e : edges) {
    ctx.cost.push_back(to_ticks(e.cost, ctx.sc.cost));
    ctx.save.push_back(to_ticks(inst.eta * e.cost, ctx.sc.cost));
    ctx.time.push_back(to_ticks(e.time_min, ctx.sc.time));
  }
  return ctx;
}

VehiclePlan make_vehicle_plan(const RoadNetwork& net, const Vehicle& v,
                              const std::vector<int>& route_edges, const Rational& delay) {
  VehiclePlan vp;
  vp.vehicle_id = v.id;
  vp.route_edges = route_edges;
  vp.delay = delay;
  Rational t = v.earliest_departure + delay;
  vp.entry_times.reserve(route_edges.size());
  for (int ei : route_edges) {
    vp.entry_times.push_back(t);
    t += net.edge(ei).time_min;
  }
  return vp;
}

Plan assemble_plan(const Instance& inst, std::vector<VehiclePlan> vehicles, SolveStatus status) {
  Plan plan;
  plan.vehicles = std::move(vehicles);
  plan.platoons = derive_platoon_groups(inst, plan.vehicles);
  plan.objective = compute_plan_objective(inst, plan.vehicles);
  plan.status = status;
  return plan;
}

// Every solver exit runs through here: the plan must satisfy the generated
// variable space and reproduce its own objective, or something is broken.
void audit_plan(const CoordinationModel& model, const Plan& plan) {
  Assignment a = assignment_from_plan(model, plan);
  auto violations = check_feasibility(model, a);
  if (!violations.empty()) {
    throw std::logic_error("solver emitted an infeasible plan: " +
                           to_string(violations.front().kind) + " (" +
                           violations.front().detail + ")");
  }
  if (objective_value(model, a) != plan.objective) {
    throw std::logic_error("solver objective disagrees with the model objective");
  }
}

std::string no_route_message(const Vehicle& v) {
  return "vehicle " + std::to_string(v.id) +
         ": no admissible route within detour budget and deadline";
}

// ---------------------------------------------------------------------------
// Oracle: full cross-product enumeration, kept free of the pruning and tick
// machinery of the exact search so the two can check each other.

struct OracleOption {
  Rational delay;
  const Path* path = nullptr;
  Rational cost;  // route cost + wait cost
  std::vector<std::pair<int, Rational>> entries;
};

Plan oracle_impl(const Instance& inst, const SolverConfig& cfg) {
  const RoadNetwork& net = inst.net();
  const std::size_t n = inst.vehicles.size();
  if (n > 4) throw ValidationError("oracle: at most 4 vehicles");
  const auto grid = delay_grid(inst.max_wait, cfg.resolution);
  if (grid.size() > 41) throw ValidationError("oracle: delay grid too large");

  // Odometer digits: vehicles by ascending id (most significant first),
  // options by (delay, route node sequence). Keeping the first strict
  // minimum then realizes the documented tie-break.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return inst.vehicles[a].id < inst.vehicles[b].id; });

  std::vector<std::vector<Path>> menus(n);
  std::vector<std::vector<OracleOption>> options(n);  // indexed like order
  for (std::size_t k = 0; k < n; ++k) {
    const Vehicle& v = inst.vehicles[order[k]];
    menus[k] = admissible_paths(inst, v);
    if (menus[k].empty()) throw ValidationError(no_route_message(v));
    if (menus[k].size() > 50) throw ValidationError("oracle: route menu too large");
    std::vector<const Path*> by_nodes;
    by_nodes.reserve(menus[k].size());
    for (const Path& p : menus[k]) by_nodes.push_back(&p);
    std::sort(by_nodes.begin(), by_nodes.end(),
              [](const Path* a, const Path* b) { return a->nodes < b->nodes; });
    const Rational window = v.deadline - v.earliest_departure;
    const Rational eps = inst.vehicle_wait_cost(v);
    for (const Rational& d : grid) {
      for (const Path* p : by_nodes) {
        if (p->total_time + d > window) continue;
        OracleOption o;
        o.delay = d;
        o.path = p;
        o.cost = p->total_cost + eps * d;
        Rational t = v.earliest_departure + d;
        for (int ei : p->edge_indices) {
          o.entries.emplace_back(ei, t);
          t += net.edge(ei).time_min;
        }
        options[k].push_back(std::move(o));
      }
    }
    if (options[k].empty()) throw ValidationError(no_route_message(v));
  }

  std::vector<std::size_t> idx(n, 0);
  std::vector<std::size_t> best_idx;
  Rational best_total;
  bool have_best = false;
  std::vector<std::tuple<int, Rational, Rational>> slots;  // edge, entry, discount
  bool rolling = true;
  while (rolling) {
    Rational total(0);
    slots.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const OracleOption& o = options[k][idx[k]];
      total += o.cost;
      if (inst.vehicles[order[k]].platoon_capable) {
        for (const auto& [ei, entry] : o.entries) {
          slots.emplace_back(ei, entry, inst.eta * net.edge(ei).cost);
        }
      }
    }
    std::sort(slots.begin(), slots.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
      return std::get<1>(a) < std::get<1>(b);
    });
    // every co-timed vehicle beyond the first on a slot rides at a discount
    for (std::size_t i = 1; i < slots.size(); ++i) {
      if (std::get<0>(slots[i]) == std::get<0>(slots[i - 1]) &&
          std::get<1>(slots[i]) == std::get<1>(slots[i - 1])) {
        total -= std::get<2>(slots[i]);
      }
    }
    if (!have_best || total < best_total) {
      have_best = true;
      best_total = total;
      best_idx = idx;
    }
    // advance the least significant digit, carrying leftward
    std::size_t pos = n;
    while (true) {
      if (pos == 0) {
        rolling = false;
        break;
      }
      --pos;
      if (++idx[pos] < options[pos].size()) break;
      idx[pos] = 0;
    }
  }

  std::vector<VehiclePlan> vplans(n);
  for (std::size_t k = 0; k < n; ++k) {
    const OracleOption& o = options[k][best_idx[k]];
    vplans[order[k]] =
        make_vehicle_plan(net, inst.vehicles[order[k]], o.path->edge_indices, o.delay);
  }
  Plan plan = assemble_plan(inst, std::move(vplans), SolveStatus::optimal);
  if (plan.objective != best_total) {
    throw std::logic_error("oracle objective disagrees with the plan objective");
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Heuristic: greedy placement plus best-response local search. The response
// of one vehicle against fixed others is a deterministic Dijkstra over
// (node, elapsed-time) states with edge weight cost - eta*cost on slots some
// capable vehicle already occupies, which is exactly the vehicle's marginal
// contribution to the objective.

struct HeuristicChoice {
  std::vector<int> edges;
  std::vector<std::int64_t> off;  // entry offsets from departure, time ticks
  Rational delay;
  std::int64_t delay_ticks = 0;
  std::int64_t route_cost = 0;  // raw route cost, cost ticks
  std::int64_t wait_cost = 0;   // eps * delay, cost ticks
};

struct HeuristicContext {
  const Instance& inst;
  const CoordinationModel& model;
  const TickContext& ticks;
  std::vector<Rational> grid;
  std::vector<std::int64_t> grid_ticks;
};

HeuristicChoice choice_from_edges(const HeuristicContext& ctx, std::vector<int> edges,
                                  const Rational& delay, std::int64_t delay_ticks,
                                  std::int64_t wait_cost) {
  HeuristicChoice c;
  c.edges = std::move(edges);
  c.delay = delay;
  c.delay_ticks = delay_ticks;
  c.wait_cost = wait_cost;
  std::int64_t t = 0;
  c.off.reserve(c.edges.size());
  for (int ei : c.edges) {
    c.off.push_back(t);
    t += ctx.ticks.time[ei];
    c.route_cost += ctx.ticks.cost[ei];
  }
  return c;
}

void occupy(Occupancy& occ, const HeuristicChoice& c, std::int64_t dep, int delta) {
  for (std::size_t k = 0; k < c.edges.size(); ++k) {
    SlotKey key{c.edges[k], dep + c.off[k]};
    auto it = occ.try_emplace(key, 0).first;
    it->second += delta;
    if (it->second == 0) occ.erase(it);
  }
}

// Marginal objective contribution of a choice against fixed others.
std::int64_t marginal_cost(const HeuristicContext& ctx, const HeuristicChoice& c,
                           std::int64_t dep, bool capable, const Occupancy& occ) {
  std::int64_t total = c.route_cost + c.wait_cost;
  if (!capable) return total;
  for (std::size_t k = 0; k < c.edges.size(); ++k) {
    auto it = occ.find(SlotKey{c.edges[k], dep + c.off[k]});
    if (it != occ.end() && it->second > 0) total -= ctx.ticks.save[c.edges[k]];
  }
  return total;
}

// Cheapest simple route for one departure against fixed others; false when
// no deadline-feasible route exists (or the rare degenerate search aborts).
bool best_response(const HeuristicContext& ctx, const Vehicle& v, bool capable,
                   std::int64_t dep, std::int64_t elapsed_cap, const Occupancy& occ,
                   std::vector<int>& out_edges, std::int64_t& out_cost) {
  if (elapsed_cap < 0) return false;
  const RoadNetwork& net = ctx.inst.net();
  constexpr std::size_t kStateLimit = 4'000'000;
  std::unordered_map<SlotKey, std::int64_t, SlotHash> dist;  // (node, elapsed) -> cost
  std::unordered_map<SlotKey, int, SlotHash> parent;         // -> incoming edge
  using QItem = std::tuple<std::int64_t, NodeId, std::int64_t>;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> pq;
  dist[SlotKey{static_cast<int>(v.origin), 0}] = 0;
  pq.emplace(0, v.origin, 0);
  bool found = false;
  std::int64_t end_elapsed = 0;
  while (!pq.empty()) {
    auto [d, node, elapsed] = pq.top();
    pq.pop();
    auto dit = dist.find(SlotKey{static_cast<int>(node), elapsed});
    if (dit == dist.end() || dit->second != d) continue;  // stale entry
    if (node == v.dest) {
      found = true;
      out_cost = d;
      end_elapsed = elapsed;
      break;
    }
    for (int ei : net.out_edges(node)) {
      const std::int64_t nel = elapsed + ctx.ticks.time[ei];
      if (nel > elapsed_cap) continue;
      std::int64_t w = ctx.ticks.cost[ei];
      if (capable) {
        auto oit = occ.find(SlotKey{ei, dep + elapsed});
        if (oit != occ.end() && oit->second > 0) w -= ctx.ticks.save[ei];
      }
      const NodeId to = net.edge(ei).to;
      SlotKey nstate{static_cast<int>(to), nel};
      auto [it, fresh] = dist.try_emplace(nstate, d + w);
      if (!fresh) {
        if (it->second <= d + w) continue;
        it->second = d + w;
      }
      parent[nstate] = ei;
      pq.emplace(d + w, to, nel);
    }
    if (dist.size() > kStateLimit) return false;
  }
  if (!found) return false;
  out_edges.clear();
  NodeId node = v.dest;
  std::int64_t elapsed = end_elapsed;
  while (!(node == v.origin && elapsed == 0)) {
    auto pit = parent.find(SlotKey{static_cast<int>(node), elapsed});
    if (pit == parent.end()) throw std::logic_error("best response lost its parent chain");
    const int ei = pit->second;
    out_edges.push_back(ei);
    node = net.edge(ei).from;
    elapsed -= ctx.ticks.time[ei];
  }
  std::reverse(out_edges.begin(), out_edges.end());
  // A repeated node would mean a zero-reduced-cost cycle; refuse the
  // candidate rather than emit a non-simple route.
  std::unordered_set<NodeId> seen;
  for (int ei : out_edges) {
    if (!seen.insert(net.edge(ei).from).second) return false;
  }
  return true;
}

// Best (delay, route) response over the whole delay grid; strictly-better
// acceptance keeps the smallest delay among ties.
bool best_response_all(const HeuristicContext& ctx, int pos, const Occupancy& occ,
                       HeuristicChoice& out) {
  const Vehicle& v = ctx.inst.vehicles[pos];
  const bool capable = v.platoon_capable;
  const std::int64_t dep0 = to_ticks(v.earliest_departure, ctx.ticks.sc.time);
  const std::int64_t window = to_ticks(v.deadline - v.earliest_departure, ctx.ticks.sc.time);
  const Rational eps = ctx.inst.vehicle_wait_cost(v);
  bool have = false;
  std::int64_t best_total = 0;
  std::vector<int> edges;
  for (std::size_t k = 0; k < ctx.grid.size(); ++k) {
    const std::int64_t dt = ctx.grid_ticks[k];
    std::int64_t reduced = 0;
    if (!best_response(ctx, v, capable, dep0 + dt, window - dt, occ, edges, reduced)) continue;
    const std::int64_t wait = to_ticks(eps * ctx.grid[k], ctx.ticks.sc.cost);
    if (!have || reduced + wait < best_total) {
      have = true;
      best_total = reduced + wait;
      out = choice_from_edges(ctx, edges, ctx.grid[k], dt, wait);
    }
  }
  return have;
}

// Uncoordinated fallback: the lex-smallest cheapest route when it meets the
// deadline, else the cheapest deadline-feasible route, undelayed.
HeuristicChoice baseline_choice(const HeuristicContext& ctx, int pos) {
  const Vehicle& v = ctx.inst.vehicles[pos];
  const Rational window = v.deadline - v.earliest_departure;
  Path sp = shortest_path(ctx.inst.net(), v.origin, v.dest);
  if (sp.total_time <= window) {
    return choice_from_edges(ctx, sp.edge_indices, Rational(0), 0, 0);
  }
  const std::int64_t dep0 = to_ticks(v.earliest_departure, ctx.ticks.sc.time);
  Occupancy empty;
  std::vector<int> edges;
  std::int64_t cost = 0;
  if (!best_response(ctx, v, false, dep0, to_ticks(window, ctx.ticks.sc.time), empty, edges,
                     cost)) {
    throw ValidationError(no_route_message(v));
  }
  return choice_from_edges(ctx, edges, Rational(0), 0, 0);
}

Plan heuristic_impl(const Instance& inst, const SolverConfig& cfg,
                    const CoordinationModel& model, const TickContext& ticks) {
  const std::size_t n = inst.vehicles.size();
  HeuristicContext ctx{inst, model, ticks, delay_grid(inst.max_wait, cfg.resolution), {}};
  ctx.grid_ticks.reserve(ctx.grid.size());
  for (const Rational& d : ctx.grid) ctx.grid_ticks.push_back(to_ticks(d, ticks.sc.time));

  for (std::size_t pos = 0; pos < n; ++pos) {
    if (model.vehicles()[pos].edge_windows.empty()) {
      throw ValidationError(no_route_message(inst.vehicles[pos]));
    }
  }

  // Long trips first: they carry the most platoonable mileage, so shorter
  // trips get to adapt around them.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Rational& ca = model.vehicles()[a].shortest_cost;
    const Rational& cb = model.vehicles()[b].shortest_cost;
    if (ca != cb) return cb < ca;
    return inst.vehicles[a].id < inst.vehicles[b].id;
  });

  std::vector<HeuristicChoice> choice(n);
  std::vector<std::int64_t> dep(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    dep[i] = to_ticks(inst.vehicles[i].earliest_departure, ticks.sc.time);
  }

  Occupancy occ;
  for (int pos : order) {
    const Vehicle& v = inst.vehicles[pos];
    if (!v.platoon_capable || !best_response_all(ctx, pos, occ, choice[pos])) {
      choice[pos] = baseline_choice(ctx, pos);
    }
    if (v.platoon_capable) occupy(occ, choice[pos], dep[pos] + choice[pos].delay_ticks, +1);
  }

  // Best-response passes; each accepted move strictly lowers the objective,
  // so this terminates (the cap is a safety net, not the usual exit).
  for (int pass = 0; pass < 20; ++pass) {
    bool moved = false;
    for (int pos : order) {
      if (!inst.vehicles[pos].platoon_capable) continue;
      occupy(occ, choice[pos], dep[pos] + choice[pos].delay_ticks, -1);
      const std::int64_t current =
          marginal_cost(ctx, choice[pos], dep[pos] + choice[pos].delay_ticks, true, occ);
      HeuristicChoice cand;
      if (best_response_all(ctx, pos, occ, cand)) {
        const std::int64_t cand_cost =
            marginal_cost(ctx, cand, dep[pos] + cand.delay_ticks, true, occ);
        if (cand_cost < current) {
          choice[pos] = cand;
          moved = true;
        }
      }
      occupy(occ, choice[pos], dep[pos] + choice[pos].delay_ticks, +1);
    }
    if (!moved) break;
  }

  std::vector<VehiclePlan> searched(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    searched[pos] =
        make_vehicle_plan(inst.net(), inst.vehicles[pos], choice[pos].edges, choice[pos].delay);
  }
  Plan local = assemble_plan(inst, std::move(searched), SolveStatus::heuristic);

  // Never return anything worse than the uncoordinated plan.
  std::vector<VehiclePlan> plain(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    plain[pos] = make_vehicle_plan(inst.net(), inst.vehicles[pos],
                                   baseline_choice(ctx, static_cast<int>(pos)).edges, Rational(0));
  }
  Plan base = assemble_plan(inst, std::move(plain), SolveStatus::heuristic);
  return local.objective <= base.objective ? local : base;
}

// ---------------------------------------------------------------------------
// Exact search: depth-first branch and bound over per-vehicle (route, delay)
// options on integer ticks, seeded with the heuristic incumbent. The bound
// charges every undecided vehicle its best conceivable net cost (route plus
// wait minus every discount its partner windows could ever grant), which is
// admissible because each discount a platoon grants is counted against
// exactly one member.

struct ExactRoute {
  std::vector<int> edges;
  std::vector<std::int64_t> off;      // entry offsets, time ticks
  std::vector<std::int64_t> save;     // discount ticks; 0 where no partner exists
  std::vector<std::int64_t> span_lo;  // partner window hull per edge (valid if save > 0)
  std::vector<std::int64_t> span_hi;
  std::int64_t cost = 0;
  Rational total_time;
};

struct ExactOption {
  int route = 0;
  int delay_idx = 0;
  std::int64_t delay_ticks = 0;
  std::int64_t cost = 0;       // route + wait cost
  std::int64_t potential = 0;  // upper bound on the discounts this option can reach
};

struct ExactVehicle {
  int pos = 0;
  bool capable = false;
  std::int64_t dep0 = 0;
  std::vector<ExactRoute> routes;
  std::vector<ExactOption> options;
  std::int64_t min_net = 0;  // min over options of cost - potential
};

struct ExactShared {
  std::atomic<std::int64_t> best{0};
  std::atomic<bool> timed_out{false};
  std::mutex mu;
  std::vector<int> best_choice;  // option index per search slot; empty = seed kept
  bool found = false;
  Clock::time_point deadline;
};

struct ExactSearch {
  const std::vector<ExactVehicle>& order;
  const std::vector<std::int64_t>& suffix;
  ExactShared& shared;
  Occupancy occ;
  std::vector<int> choice;
  std::int64_t cost = 0;
  std::int64_t save = 0;
  std::uint32_t steps = 0;

  explicit ExactSearch(const std::vector<ExactVehicle>& order_,
                       const std::vector<std::int64_t>& suffix_, ExactShared& shared_)
      : order(order_), suffix(suffix_), shared(shared_), choice(order_.size(), -1) {}

  void commit(const ExactRoute& rt, std::int64_t depart, int delta) {
    for (std::size_t k = 0; k < rt.edges.size(); ++k) {
      if (rt.save[k] == 0) continue;  // no partner can ever share this slot
      SlotKey key{rt.edges[k], depart + rt.off[k]};
      auto it = occ.try_emplace(key, 0).first;
      it->second += delta;
      if (it->second == 0) occ.erase(it);
    }
  }

  // Depth-first over the options of order[depth]; false aborts on timeout.
  bool run(std::size_t depth) {
    if ((++steps & 4095u) == 0 && Clock::now() > shared.deadline) {
      shared.timed_out.store(true, std::memory_order_relaxed);
    }
    if (shared.timed_out.load(std::memory_order_relaxed)) return false;
    const ExactVehicle& veh = order[depth];
    const bool leaf = depth + 1 == order.size();
    for (std::size_t oi = 0; oi < veh.options.size(); ++oi) {
      const ExactOption& opt = veh.options[oi];
      const ExactRoute& rt = veh.routes[opt.route];
      const std::int64_t depart = veh.dep0 + opt.delay_ticks;
      std::int64_t marg = 0;
      if (veh.capable && !occ.empty()) {
        for (std::size_t k = 0; k < rt.edges.size(); ++k) {
          if (rt.save[k] == 0) continue;
          auto it = occ.find(SlotKey{rt.edges[k], depart + rt.off[k]});
          if (it != occ.end() && it->second > 0) marg += rt.save[k];
        }
      }
      const std::int64_t lb = cost + opt.cost - save - marg + suffix[depth + 1];
      if (lb >= shared.best.load(std::memory_order_relaxed)) continue;
      choice[depth] = static_cast<int>(oi);
      if (leaf) {
        std::lock_guard<std::mutex> lock(shared.mu);
        if (lb < shared.best.load(std::memory_order_relaxed)) {
          shared.best.store(lb, std::memory_order_relaxed);
          shared.best_choice = choice;
          shared.found = true;
        }
        continue;
      }
      cost += opt.cost;
      save += marg;
      if (veh.capable) commit(rt, depart, +1);
      const bool ok = run(depth + 1);
      if (veh.capable) commit(rt, depart, -1);
      cost -= opt.cost;
      save -= marg;
      if (!ok) return false;
    }
    return true;
  }
};

Plan exact_impl(const Instance& inst, const SolverConfig& cfg, const CoordinationModel& model,
                const TickContext& ticks) {
  const Clock::time_point deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(cfg.time_limit_s));
  const std::size_t n = inst.vehicles.size();
  Plan seed = heuristic_impl(inst, cfg, model, ticks);

  const auto grid = delay_grid(inst.max_wait, cfg.resolution);
  std::vector<std::int64_t> grid_ticks;
  grid_ticks.reserve(grid.size());
  for (const Rational& d : grid) grid_ticks.push_back(to_ticks(d, ticks.sc.time));

  // Long trips first; their platoon structure constrains everything else.
  std::vector<int> branch(n);
  std::iota(branch.begin(), branch.end(), 0);
  std::sort(branch.begin(), branch.end(), [&](int a, int b) {
    const Rational& ca = model.vehicles()[a].shortest_cost;
    const Rational& cb = model.vehicles()[b].shortest_cost;
    if (ca != cb) return cb < ca;
    return inst.vehicles[a].id < inst.vehicles[b].id;
  });

  bool any_truncated = false;
  std::vector<ExactVehicle> order(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    const int pos = branch[slot];
    const Vehicle& v = inst.vehicles[pos];
    ExactVehicle& ev = order[slot];
    ev.pos = pos;
    ev.capable = v.platoon_capable;
    ev.dep0 = to_ticks(v.earliest_departure, ticks.sc.time);

    bool truncated = false;
    const auto menu = admissible_paths(inst, v, cfg.route_cap, &truncated);
    if (menu.empty()) {
      if (truncated) {
        throw ValidationError("vehicle " + std::to_string(v.id) +
                              ": route cap too small to build a menu");
      }
      throw ValidationError(no_route_message(v));
    }
    any_truncated = any_truncated || truncated;

    // Partner window hull per edge: co-timing outside it is impossible, so
    // an option's potential only counts entries inside the hull.
    std::unordered_map<int, std::pair<std::int64_t, std::int64_t>> hull;
    if (ev.capable) {
      for (const auto& [ei, win] : model.vehicles()[pos].edge_windows) {
        const auto& partners = model.follow_partners(pos, ei);
        if (partners.empty()) continue;
        Rational lo, hi;
        bool first = true;
        for (int w : partners) {
          const EntryWindow& pw = model.vehicles()[w].edge_windows.at(ei);
          if (first || pw.earliest < lo) lo = pw.earliest;
          if (first || hi < pw.latest) hi = pw.latest;
          first = false;
        }
        hull[ei] = {to_ticks(lo, ticks.sc.time), to_ticks(hi, ticks.sc.time)};
      }
    }

    ev.routes.reserve(menu.size());
    for (const Path& p : menu) {
      ExactRoute rt;
      rt.edges = p.edge_indices;
      rt.total_time = p.total_time;
      rt.off.reserve(rt.edges.size());
      rt.save.reserve(rt.edges.size());
      rt.span_lo.reserve(rt.edges.size());
      rt.span_hi.reserve(rt.edges.size());
      std::int64_t t = 0;
      for (int ei : rt.edges) {
        rt.off.push_back(t);
        t += ticks.time[ei];
        rt.cost += ticks.cost[ei];
        auto hit = hull.find(ei);
        if (hit == hull.end()) {
          rt.save.push_back(0);
          rt.span_lo.push_back(0);
          rt.span_hi.push_back(0);
        } else {
          rt.save.push_back(ticks.save[ei]);
          rt.span_lo.push_back(hit->second.first);
          rt.span_hi.push_back(hit->second.second);
        }
      }
      ev.routes.push_back(std::move(rt));
    }

    // Option list: routes (cost, node sequence) x delays ascending. Options
    // that cannot beat the plain cheapest route even with every reachable
    // discount are dropped; interchangeable zero-potential options collapse
    // to the single cheapest one. Both cuts preserve the optimal value.
    const Rational window = v.deadline - v.earliest_departure;
    const Rational eps = inst.vehicle_wait_cost(v);
    const std::int64_t base_cost = ev.routes.front().cost;
    std::size_t zero_at = SIZE_MAX;
    std::int64_t zero_cost = 0;
    std::vector<ExactOption> raw;
    for (std::size_t ri = 0; ri < ev.routes.size(); ++ri) {
      const ExactRoute& rt = ev.routes[ri];
      for (std::size_t di = 0; di < grid.size(); ++di) {
        if (rt.total_time + grid[di] > window) break;  // later delays only grow
        ExactOption o;
        o.route = static_cast<int>(ri);
        o.delay_idx = static_cast<int>(di);
        o.delay_ticks = grid_ticks[di];
        o.cost = rt.cost + to_ticks(eps * grid[di], ticks.sc.cost);
        const std::int64_t depart = ev.dep0 + o.delay_ticks;
        for (std::size_t k = 0; k < rt.edges.size(); ++k) {
          if (rt.save[k] == 0) continue;
          const std::int64_t entry = depart + rt.off[k];
          if (entry >= rt.span_lo[k] && entry <= rt.span_hi[k]) o.potential += rt.save[k];
        }
        if (o.potential == 0) {
          if (zero_at == SIZE_MAX || o.cost < zero_cost) {
            zero_at = raw.size();
            zero_cost = o.cost;
            raw.push_back(o);
          }
          continue;
        }
        if (o.cost - o.potential > base_cost) continue;
        raw.push_back(o);
      }
    }
    // keep only the cheapest zero-potential representative
    ev.options.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].potential == 0 && i != zero_at) continue;
      ev.options.push_back(raw[i]);
    }
    if (ev.options.empty()) throw ValidationError(no_route_message(v));
    ev.min_net = std::numeric_limits<std::int64_t>::max();
    for (const ExactOption& o : ev.options) ev.min_net = std::min(ev.min_net, o.cost - o.potential);
  }

  std::vector<std::int64_t> suffix(n + 1, 0);
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + order[k].min_net;

  ExactShared shared;
  shared.best.store(to_ticks(seed.objective, ticks.sc.cost));
  shared.deadline = deadline;
  if (Clock::now() > deadline) shared.timed_out.store(true);

  if (cfg.threads > 1 && n >= 2) {
    // Root frontier split across workers; identical objective, possibly a
    // different (equally optimal) plan than the serial order would keep.
    const ExactVehicle& rv = order[0];
    const int root_count = static_cast<int>(rv.options.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.threads)
#endif
    for (int oi = 0; oi < root_count; ++oi) {
      if (shared.timed_out.load(std::memory_order_relaxed)) continue;
      const ExactOption& opt = rv.options[static_cast<std::size_t>(oi)];
      const std::int64_t lb = opt.cost + suffix[1];
      if (lb >= shared.best.load(std::memory_order_relaxed)) continue;
      ExactSearch search(order, suffix, shared);
      search.choice[0] = oi;
      search.cost = opt.cost;
      const ExactRoute& rt = rv.routes[opt.route];
      if (rv.capable) search.commit(rt, rv.dep0 + opt.delay_ticks, +1);
      search.run(1);
    }
  } else {
    ExactSearch search(order, suffix, shared);
    search.run(0);
  }

  const bool complete = !shared.timed_out.load();
  const SolveStatus status =
      complete && !any_truncated ? SolveStatus::optimal : SolveStatus::time_limit_best;

  if (!shared.found) {
    Plan plan = std::move(seed);
    plan.status = status;
    return plan;
  }
  std::vector<VehiclePlan> vplans(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    const ExactVehicle& ev = order[slot];
    const ExactOption& o = ev.options[static_cast<std::size_t>(shared.best_choice[slot])];
    vplans[ev.pos] = make_vehicle_plan(inst.net(), inst.vehicles[ev.pos],
                                       ev.routes[o.route].edges, grid[o.delay_idx]);
  }
  Plan plan = assemble_plan(inst, std::move(vplans), status);
  if (to_ticks(plan.objective, ticks.sc.cost) != shared.best.load()) {
    throw std::logic_error("exact search bound disagrees with the plan objective");
  }
  return plan;
}

}  // namespace

std::vector<Rational> delay_grid(const Rational& max_wait, const Rational& resolution) {
  if (resolution <= Rational(0)) throw ValidationError("solver: delay resolution must be positive");
  if (max_wait < Rational(0)) throw ValidationError("solver: max wait must be nonnegative");
  const std::int64_t steps = (max_wait / resolution).floor();
  if (steps >= 1'000'000) throw ValidationError("solver: delay grid too fine");
  std::vector<Rational> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (std::int64_t k = 0; k <= steps; ++k) grid.push_back(resolution * Rational(k));
  return grid;
}

std::vector<Path> admissible_paths(const Instance& inst, const Vehicle& v, std::size_t cap,
                                   bool* truncated) {
  const Rational budget_factor = Rational(1) / (Rational(1) - inst.eta);
  std::vector<Path> all =
      bounded_paths(inst.net(), v.origin, v.dest, budget_factor, cap, truncated);
  const Rational window = v.deadline - v.earliest_departure;
  std::vector<Path> keep;
  keep.reserve(all.size());
  for (Path& p : all) {
    if (p.total_time <= window) keep.push_back(std::move(p));
  }
  return keep;
}

Plan solve_oracle(const Instance& inst, const SolverConfig& cfg) {
  validate_instance(inst);
  validate_config(cfg);
  CoordinationModel model = CoordinationModel::build(inst);
  if (inst.vehicles.empty()) return assemble_plan(inst, {}, SolveStatus::optimal);
  Plan plan = oracle_impl(inst, cfg);
  audit_plan(model, plan);
  return plan;
}

Plan solve_heuristic(const Instance& inst, const SolverConfig& cfg) {
  validate_instance(inst);
  validate_config(cfg);
  CoordinationModel model = CoordinationModel::build(inst);
  if (inst.vehicles.empty()) return assemble_plan(inst, {}, SolveStatus::heuristic);
  TickContext ticks = make_tick_context(inst, cfg.resolution);
  Plan plan = heuristic_impl(inst, cfg, model, ticks);
  audit_plan(model, plan);
  return plan;
}

Plan solve_exact(const Instance& inst, const SolverConfig& cfg) {
  validate_instance(inst);
  validate_config(cfg);
  CoordinationModel model = CoordinationModel::build(inst);
  if (inst.vehicles.empty()) return assemble_plan(inst, {}, SolveStatus::optimal);
  TickContext ticks = make_tick_context(inst, cfg.resolution);
  Plan plan = exact_impl(inst, cfg, model, ticks);
  audit_plan(model, plan);
  return plan;
}

Plan solve(const Instance& inst, const SolverConfig& cfg) {
  switch (cfg.mode) {
    case SolverConfig::Mode::exact:
      return solve_exact(inst, cfg);
    case SolverConfig::Mode::heuristic:
      return solve_heuristic(inst, cfg);
    case SolverConfig::Mode::oracle:
      return solve_oracle(inst, cfg);
  }
  throw ValidationError("solver: unknown mode");
}

}  // namespace platoon
