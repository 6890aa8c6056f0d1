#pragma once

#include <memory>
#include <span>
#include <vector>

#include "msprp/instance.hpp"
#include "msprp/matrix.hpp"

namespace msprp {

struct EnvOptions {
  // When false (default) agents may only unload at their home station; other
  // stations are masked out.
  bool unload_at_any_station = false;
};

// Mutable snapshot of one episode. Shelf-stage columns are location indices
// with the STAY sentinel at column num_locations(); SKU-stage columns are SKU
// indices with the DUMMY sentinel at column num_skus().
struct State {
  std::shared_ptr<const Instance> inst;
  EnvOptions options;
  int step = 0;
  std::vector<int> demand;
  Matrix<int> supply;
  std::vector<int> location;
  std::vector<int> capacity;
  std::vector<std::vector<int>> tours;
  std::vector<double> tour_length;
  // Set by partial_transition for agents that chose the STAY sentinel; such
  // agents cannot pick in the same step.
  std::vector<std::uint8_t> waiting;

  int num_agents() const { return static_cast<int>(location.size()); }
  int total_demand() const;
  int stay_column() const { return inst->num_locations(); }
  int dummy_column() const { return inst->num_skus(); }

  friend bool operator==(const State& a, const State& b) {
    return a.inst == b.inst && a.step == b.step && a.demand == b.demand && a.supply == b.supply &&
           a.location == b.location && a.capacity == b.capacity && a.tours == b.tours &&
           a.tour_length == b.tour_length && a.waiting == b.waiting;
  }
};

struct JointAction {
  std::vector<int> shelf;  // location index or STAY column
  std::vector<int> sku;    // SKU index or DUMMY column
};

State initial_state(std::shared_ptr<const Instance> inst, EnvOptions options = {});

bool is_terminal(const State& s);
// -max tour length; throws std::logic_error on a non-terminal state.
double reward(const State& s);
double max_tour_length(const State& s);

// M x (|V| + 1). Throws std::logic_error("episode finished") on terminal states.
Mask shelf_mask(const State& s);

// |P| + 1 for one agent of an intermediate state. DUMMY is always feasible.
std::vector<std::uint8_t> sku_mask(const State& s_prime, int agent);
Mask sku_mask(const State& s_prime);
// The mask handed to action selection in the SKU stage: like sku_mask, except
// DUMMY is drawable only for agents without any feasible real SKU. An agent
// that walked to a shelf therefore picks something unless a preceding agent's
// claim removes its last option, in which case it keeps DUMMY as default.
Mask sku_selection_mask(const State& s_prime);

// Moves agents; throws InfeasibleActionError for choices outside shelf_mask.
State partial_transition(const State& s, std::span<const int> shelf_choices);

// Pick quantities in `order` (a permutation of all agents). Supply is not
// reduced by predecessors within the step.
std::vector<int> pick_quantities(const State& s_prime, std::span<const int> order,
                                 std::span<const int> sku_choices);

// Applies SKU choices to an intermediate state: validates feasibility and the
// no-duplicate (shelf, SKU) rule, picks, unloads at stations, advances t.
State apply_picks(const State& s_prime, std::span<const int> sku_choices, std::span<const int> order);

State transition(const State& s, const JointAction& a, std::span<const int> order);

// Extends a permutation prefix with the missing agents in index order.
std::vector<int> complete_order(std::span<const int> prefix, int num_agents);

// Sum of distances along a tour sequence.
double tour_distance(const Instance& inst, std::span<const int> tour);

}  // namespace msprp
