#include "msprp/heuristic.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "msprp/errors.hpp"

namespace msprp {

LogitMatrix GreedyPolicy::shelf_logits(const State& s) const {
  const Instance& inst = *s.inst;
  const int nv = inst.num_locations();
  const Mask mask = is_terminal(s) ? Mask(s.num_agents(), nv + 1, 0) : shelf_mask(s);
  const double eps = params_.epsilon;
  LogitMatrix out{Matrix<double>(s.num_agents(), nv + 1, 0.0), Subspace::Shelf};
  for (int m = 0; m < s.num_agents(); ++m) {
    const int here = s.location[m];
    double sum = 0.0;
    int count = 0;
    for (int v = 0; v < nv; ++v) {
      if (mask(m, v) && v != here) {
        sum += inst.distance(here, v);
        ++count;
      }
    }
    // Staying (or re-selecting the current location) is priced at the mean
    // distance of the agent's other options.
    const double stay = -std::log((count ? sum / count : 1.0) + eps);
    for (int v = 0; v < nv; ++v) {
      const double logit = v == here ? stay : -std::log(inst.distance(here, v) + eps);
      out.values(m, v) = params_.sharpness * logit;
    }
    out.values(m, nv) = params_.sharpness * stay;
  }
  return out;
}

LogitMatrix GreedyPolicy::sku_logits(const State& s_prime) const {
  const Instance& inst = *s_prime.inst;
  const int np = inst.num_skus();
  const double eps = params_.epsilon;
  LogitMatrix out{Matrix<double>(s_prime.num_agents(), np + 1, 0.0), Subspace::Sku};
  for (int m = 0; m < s_prime.num_agents(); ++m) {
    const int v = s_prime.location[m];
    for (int p = 0; p < np; ++p) {
      const int units = std::max(0, std::min({s_prime.capacity[m], s_prime.demand[p], s_prime.supply(v, p)}));
      out.values(m, p) = params_.sharpness * std::log(units + eps);
    }
    out.values(m, np) = params_.sharpness * std::log(eps);
  }
  return out;
}

int step_budget(const Instance& inst) { return 10 * (num_agents(inst) + inst.total_demand()); }

namespace {

Mask progress_cells(const State& s, const Mask& feasible) {
  Mask progress = feasible;
  const int stay = s.stay_column();
  for (int m = 0; m < s.num_agents(); ++m) {
    progress(m, stay) = 0;
    const int here = s.location[m];
    if (s.inst->is_station(here)) progress(m, here) = 0;
  }
  return progress;
}

}  // namespace

Solution rollout(const Policy& policy, std::shared_ptr<const Instance> inst, const DecodeConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const int budget = step_budget(*inst);
  Rng rng(cfg.seed);
  State s = initial_state(inst, cfg.env);
  const int agents = s.num_agents();

  Solution sol;
  sol.instance_id = inst->id();
  while (!is_terminal(s)) {
    if (static_cast<int>(sol.steps.size()) >= budget) {
      throw Error("rollout exceeded the step budget of " + std::to_string(budget) + " steps");
    }
    StepRecord rec;

    const Mask shelf_feasible = shelf_mask(s);
    const Mask progress = progress_cells(s, shelf_feasible);
    SelectionConfig shelf_cfg;
    shelf_cfg.temperature = cfg.temperature;
    shelf_cfg.mode = cfg.mode;
    shelf_cfg.defaults.assign(agents, s.stay_column());
    if (s.total_demand() > 0) {
      shelf_cfg.progress = &progress;
      shelf_cfg.utilization = s.tour_length;
    }
    const Selection shelves = select(policy.shelf_logits(s), shelf_feasible, shelf_cfg, rng);

    const State s_prime = partial_transition(s, shelves.actions);
    SelectionConfig sku_cfg;
    sku_cfg.temperature = cfg.temperature;
    sku_cfg.mode = cfg.mode;
    sku_cfg.defaults.assign(agents, s.dummy_column());
    sku_cfg.mask_update = make_sku_mask_update(s_prime.location);
    const Selection skus = select(policy.sku_logits(s_prime), sku_selection_mask(s_prime), sku_cfg, rng);

    rec.action = {shelves.actions, skus.actions};
    rec.shelf_order = shelves.order;
    rec.shelf_drawn = shelves.actions;
    if (shelves.override_agent >= 0) {
      rec.shelf_override = shelves.override_agent;
      for (std::size_t k = 0; k < shelves.order.size(); ++k) {
        if (shelves.order[k] == shelves.override_agent) rec.shelf_drawn[shelves.override_agent] = shelves.drawn[k];
      }
    }
    rec.sku_order = skus.order;
    rec.pick_order = complete_order(skus.order, agents);
    rec.locations = s_prime.location;
    rec.quantities = pick_quantities(s_prime, rec.pick_order, skus.actions);
    rec.log_prob = shelves.log_prob + skus.log_prob;
    sol.log_prob += rec.log_prob;

    s = apply_picks(s_prime, skus.actions, rec.pick_order);
    sol.steps.push_back(std::move(rec));
  }

  sol.tours = s.tours;
  sol.objective = max_tour_length(s);
  for (double len : s.tour_length) sol.total_distance += len;
  sol.meta.policy = policy.name();
  sol.meta.decode = cfg.mode == DecodeMode::Greedy ? "greedy" : "sample";
  sol.meta.seed = cfg.seed;
  sol.meta.samples = 1;
  sol.meta.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

std::uint64_t sample_seed(std::uint64_t base, int index) {
  return base ^ (static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ULL);
}

Solution sample_best(const Policy& policy, std::shared_ptr<const Instance> inst, int samples,
                     const DecodeConfig& cfg) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  Solution best;
  for (int i = 0; i < samples; ++i) {
    DecodeConfig c = cfg;
    c.seed = sample_seed(cfg.seed, i);
    Solution sol = rollout(policy, inst, c);
    if (i == 0 || sol.objective < best.objective) best = std::move(sol);
  }
  best.meta.seed = cfg.seed;
  best.meta.samples = samples;
  best.meta.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

}  // namespace msprp
