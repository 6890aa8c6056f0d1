#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msprp/heuristic.hpp"
#include "msprp/instance.hpp"

namespace msprp {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool ok() const;
  const CheckResult* find(const std::string& name) const;
  // One line per check: "<name>: PASS" or "<name>: FAIL <detail>".
  std::string to_text() const;
};

// Replays the solution's pick records against the instance, independently of
// the environment. Checks: demand, supply, capacity, depot, tours,
// no_duplicate_pick, objective.
ValidationReport validate(const Instance& inst, const Solution& sol);

struct SearchLimits {
  int max_locations = 4;      // storage cells with positive supply
  int max_total_demand = 8;
  int max_agents = 2;
  std::uint64_t node_budget = 20'000'000;
  double time_budget_seconds = 120.0;
};

struct BruteForceOptions {
  // Disable to run plain enumeration (used to cross-check the pruning).
  bool prune = true;
};

struct BruteForceResult {
  Solution solution;
  std::uint64_t nodes = 0;
};

// Exhaustive depth-first search over the environment's joint actions with
// branch-and-bound. Throws LimitError when the instance exceeds `limits` or a
// budget runs out; never returns an approximation.
BruteForceResult brute_force(std::shared_ptr<const Instance> inst, const SearchLimits& limits = {},
                             BruteForceOptions options = {});

// Row counts of the exported model.
struct LpStats {
  int locations = 0;          // stations + storage locations
  int storage_locations = 0;
  int tours = 0;
  int flow_rows = 0;
  int subtour_rows = 0;
  int total_rows = 0;
};

inline constexpr int kMaxLpStorageLocations = 12;

// Min-max MILP in CPLEX LP format. Storage locations are the (shelf, SKU)
// cells with positive supply. Throws LimitError when there are more than
// kMaxLpStorageLocations of them.
std::string export_lp(const Instance& inst, LpStats* stats = nullptr);

// Number of subtour rows per tour for n storage locations: 2^n - n - 1.
std::uint64_t subtour_rows_per_tour(int storage_locations);

}  // namespace msprp
