#include "msprp/env.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <stdexcept>

#include "msprp/errors.hpp"

namespace msprp {

int State::total_demand() const { return std::accumulate(demand.begin(), demand.end(), 0); }

State initial_state(std::shared_ptr<const Instance> inst, EnvOptions options) {
  State s;
  const int m = num_agents(*inst);
  s.options = options;
  s.demand = inst->demand();
  s.supply = inst->supply();
  s.location.resize(m);
  s.capacity.assign(m, inst->capacity());
  s.tours.resize(m);
  s.tour_length.assign(m, 0.0);
  s.waiting.assign(m, 0);
  for (int a = 0; a < m; ++a) {
    s.location[a] = inst->home_station(a);
    s.tours[a] = {s.location[a]};
  }
  s.inst = std::move(inst);
  return s;
}

bool is_terminal(const State& s) {
  if (s.total_demand() != 0) return false;
  for (int m = 0; m < s.num_agents(); ++m) {
    if (s.location[m] != s.inst->home_station(m)) return false;
  }
  return true;
}

double max_tour_length(const State& s) {
  double best = 0.0;
  for (double len : s.tour_length) best = std::max(best, len);
  return best;
}

double reward(const State& s) {
  if (!is_terminal(s)) throw std::logic_error("reward is only defined on terminal states");
  return -max_tour_length(s);
}

Mask shelf_mask(const State& s) {
  if (is_terminal(s)) throw std::logic_error("episode finished");
  const Instance& inst = *s.inst;
  const int nv = inst.num_locations();
  const int np = inst.num_skus();
  const bool demand_left = s.total_demand() > 0;

  // Shelves storing at least one SKU still in demand; shared by all agents.
  std::vector<std::uint8_t> useful(nv, 0);
  if (demand_left) {
    for (int v = inst.num_stations(); v < nv; ++v) {
      for (int p = 0; p < np; ++p) {
        if (s.supply(v, p) > 0 && s.demand[p] > 0) {
          useful[v] = 1;
          break;
        }
      }
    }
  }

  Mask mask(s.num_agents(), nv + 1, 0);
  for (int m = 0; m < s.num_agents(); ++m) {
    const int home = inst.home_station(m);
    if (!demand_left) {
      if (s.location[m] != home) mask(m, home) = 1;
      continue;
    }
    mask(m, home) = 1;
    if (s.capacity[m] == 0) continue;
    mask(m, nv) = 1;
    for (int v = 0; v < nv; ++v) {
      if (useful[v] || (s.options.unload_at_any_station && inst.is_station(v))) mask(m, v) = 1;
    }
  }
  return mask;
}

std::vector<std::uint8_t> sku_mask(const State& s_prime, int agent) {
  const Instance& inst = *s_prime.inst;
  const int np = inst.num_skus();
  std::vector<std::uint8_t> row(np + 1, 0);
  row[np] = 1;
  const int v = s_prime.location[agent];
  if (s_prime.waiting[agent] || inst.is_station(v) || s_prime.capacity[agent] == 0) return row;
  for (int p = 0; p < np; ++p) row[p] = (s_prime.demand[p] > 0 && s_prime.supply(v, p) > 0) ? 1 : 0;
  return row;
}

Mask sku_mask(const State& s_prime) {
  const int np = s_prime.inst->num_skus();
  Mask mask(s_prime.num_agents(), np + 1, 0);
  for (int m = 0; m < s_prime.num_agents(); ++m) {
    const auto row = sku_mask(s_prime, m);
    std::copy(row.begin(), row.end(), mask.row(m).begin());
  }
  return mask;
}

Mask sku_selection_mask(const State& s_prime) {
  Mask mask = sku_mask(s_prime);
  const std::size_t np = mask.cols() - 1;
  for (std::size_t m = 0; m < mask.rows(); ++m) {
    const auto row = mask.row(m);
    if (std::any_of(row.begin(), row.begin() + static_cast<long>(np), [](auto f) { return f != 0; })) {
      mask(m, np) = 0;
    }
  }
  return mask;
}

State partial_transition(const State& s, std::span<const int> shelf_choices) {
  const int m_count = s.num_agents();
  if (static_cast<int>(shelf_choices.size()) != m_count) {
    throw std::invalid_argument("expected one shelf choice per agent");
  }
  const Mask mask = shelf_mask(s);
  const int stay = s.stay_column();
  State next = s;
  for (int m = 0; m < m_count; ++m) {
    const int c = shelf_choices[m];
    if (c < 0 || c > stay) throw InfeasibleActionError(m, "shelf choice out of range");
    const auto row = mask.row(m);
    const bool finished = std::none_of(row.begin(), row.end(), [](auto f) { return f != 0; });
    if (!(mask(m, c) || (finished && c == stay))) {
      if (s.capacity[m] == 0) throw InfeasibleActionError(m, "capacity exhausted: only the home station is allowed");
      if (s.total_demand() == 0) throw InfeasibleActionError(m, "demand met: agent must return to its home station");
      throw InfeasibleActionError(m, "location " + std::to_string(c) + " is not feasible");
    }
    if (c == stay) {
      next.waiting[m] = 1;
      continue;
    }
    next.waiting[m] = 0;
    if (c != s.location[m]) {
      next.tour_length[m] += s.inst->distance(s.location[m], c);
      next.location[m] = c;
      next.tours[m].push_back(c);
    }
  }
  return next;
}

std::vector<int> pick_quantities(const State& s_prime, std::span<const int> order,
                                 std::span<const int> sku_choices) {
  const int dummy = s_prime.dummy_column();
  std::vector<int> y(s_prime.num_agents(), 0);
  std::vector<int> taken(s_prime.inst->num_skus(), 0);
  for (int m : order) {
    const int p = sku_choices[m];
    if (p == dummy) continue;
    const int v = s_prime.location[m];
    const int q = std::min({s_prime.capacity[m], s_prime.demand[p] - taken[p], s_prime.supply(v, p)});
    y[m] = std::max(q, 0);
    taken[p] += y[m];
  }
  return y;
}

State apply_picks(const State& s_prime, std::span<const int> sku_choices, std::span<const int> order) {
  const int m_count = s_prime.num_agents();
  const int dummy = s_prime.dummy_column();
  if (static_cast<int>(sku_choices.size()) != m_count) {
    throw std::invalid_argument("expected one SKU choice per agent");
  }
  std::vector<int> seen(m_count, 0);
  if (static_cast<int>(order.size()) != m_count) throw std::invalid_argument("order must list every agent");
  for (int m : order) {
    if (m < 0 || m >= m_count || seen[m]++) throw std::invalid_argument("order must be a permutation of agents");
  }

  for (int m = 0; m < m_count; ++m) {
    const int p = sku_choices[m];
    if (p < 0 || p > dummy) throw InfeasibleActionError(m, "SKU choice out of range");
    if (!sku_mask(s_prime, m)[p]) {
      throw InfeasibleActionError(m, "SKU " + std::to_string(p) + " is not pickable at location " +
                                         std::to_string(s_prime.location[m]));
    }
    if (p == dummy) continue;
    for (int j = 0; j < m; ++j) {
      if (sku_choices[j] == p && s_prime.location[j] == s_prime.location[m]) {
        throw InfeasibleActionError(m, "duplicate shelf-SKU pair (" + std::to_string(s_prime.location[m]) +
                                           ", " + std::to_string(p) + ") also chosen by agent " +
                                           std::to_string(j));
      }
    }
  }

  const auto y = pick_quantities(s_prime, order, sku_choices);
  State next = s_prime;
  const Instance& inst = *s_prime.inst;
  for (int m = 0; m < m_count; ++m) {
    const int p = sku_choices[m];
    const int v = next.location[m];
    if (p != dummy) {
      next.demand[p] -= y[m];
      next.supply(v, p) -= y[m];
      next.capacity[m] -= y[m];
      assert(next.demand[p] >= 0 && next.supply(v, p) >= 0 && next.capacity[m] >= 0);
    }
    if (inst.is_station(v) && (v == inst.home_station(m) || next.options.unload_at_any_station)) {
      next.capacity[m] = inst.capacity();
    }
  }
  next.step += 1;
  return next;
}

State transition(const State& s, const JointAction& a, std::span<const int> order) {
  const State s_prime = partial_transition(s, a.shelf);
  return apply_picks(s_prime, a.sku, order);
}

std::vector<int> complete_order(std::span<const int> prefix, int num_agents) {
  std::vector<int> order(prefix.begin(), prefix.end());
  std::vector<std::uint8_t> present(num_agents, 0);
  for (int m : order) present[m] = 1;
  for (int m = 0; m < num_agents; ++m) {
    if (!present[m]) order.push_back(m);
  }
  return order;
}

double tour_distance(const Instance& inst, std::span<const int> tour) {
  double total = 0.0;
  for (std::size_t i = 1; i < tour.size(); ++i) total += inst.distance(tour[i - 1], tour[i]);
  return total;
}

}  // namespace msprp
