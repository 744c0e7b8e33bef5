#ifndef PLATOON_SOLVER_HPP
#define PLATOON_SOLVER_HPP

#include <cstdint>
#include <vector>

#include "platoon/instance.hpp"
#include "platoon/model.hpp"
#include "platoon/plan.hpp"

namespace platoon {

struct SolverConfig {
  enum class Mode { exact, heuristic, oracle };

  Mode mode = Mode::exact;
  double time_limit_s = 300.0;     // wall-clock budget of the exact search
  Rational resolution = Rational(1);  // delay grid step, minutes
  int threads = 1;                 // exact-search workers; 1 is fully deterministic
  std::size_t route_cap = 2000;    // per-vehicle route menu cap for the exact
                                   // search; 0 lifts the cap. A truncated menu
                                   // downgrades the result to time_limit_best.
  std::uint64_t seed = 0;          // reserved for callers that generate instances
};

// Admissible departure delays {0, r, 2r, ...} up to max_wait.
std::vector<Rational> delay_grid(const Rational& max_wait, const Rational& resolution);

// Route menu of one vehicle: simple paths within the 1/(1-eta) detour budget
// whose free-flow travel time fits between earliest departure and deadline,
// ordered by (cost, node sequence). cap == 0 enumerates every such path;
// otherwise enumeration stops at cap routes (pre-filter) and *truncated
// reports the cut.
std::vector<Path> admissible_paths(const Instance& inst, const Vehicle& v, std::size_t cap = 0,
                                   bool* truncated = nullptr);

// Dispatches on cfg.mode.
Plan solve(const Instance& inst, const SolverConfig& cfg);

// Branch and bound over (route, delay) choices, seeded with the heuristic
// plan. Proves optimality unless the time budget or the route cap cuts the
// search, in which case the best incumbent is returned as time_limit_best.
// threads > 1 splits the root frontier across workers; the objective value
// is unchanged, only which optimal plan is returned may differ.
Plan solve_exact(const Instance& inst, const SolverConfig& cfg);

// Greedy construction plus best-response local search. Deterministic, and
// never worse than the uncoordinated plan that sends every vehicle down its
// cheapest admissible route undelayed.
Plan solve_heuristic(const Instance& inst, const SolverConfig& cfg);

// Exhaustive enumeration over the full (route, delay) cross product, written
// independently of solve_exact as its correctness reference. Among optimal
// plans returns the lexicographically smallest by (vehicle id, delay, route
// node sequence). Refuses instances beyond 4 vehicles, 50 routes per
// vehicle, or 41 delay points.
Plan solve_oracle(const Instance& inst, const SolverConfig& cfg);

}  // namespace platoon

#endif  // PLATOON_SOLVER_HPP
