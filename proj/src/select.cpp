#include "msprp/select.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace msprp {

namespace {

bool any_feasible(const Mask& mask) {
  for (auto f : mask.data()) {
    if (f) return true;
  }
  return false;
}

void check_shapes(const LogitMatrix& logits, const Mask& feasible) {
  if (logits.values.rows() != feasible.rows() || logits.values.cols() != feasible.cols()) {
    throw std::invalid_argument("logit matrix and mask shapes differ");
  }
  for (std::size_t i = 0; i < feasible.data().size(); ++i) {
    if (feasible.data()[i] && !std::isfinite(logits.values.data()[i])) {
      throw std::invalid_argument("non-finite logit in a feasible cell");
    }
  }
}

// log-sum-exp of L/beta over feasible cells.
double log_normalizer(const Matrix<double>& L, const Mask& feasible, double beta) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < feasible.data().size(); ++i) {
    if (feasible.data()[i]) top = std::max(top, L.data()[i] / beta);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < feasible.data().size(); ++i) {
    if (feasible.data()[i]) sum += std::exp(L.data()[i] / beta - top);
  }
  return top + std::log(sum);
}

void mark_assigned(Mask& feasible, std::vector<int>& actions, std::vector<std::uint8_t>& assigned, int agent,
                   int action, const MaskUpdate& update) {
  actions[agent] = action;
  assigned[agent] = 1;
  auto row = feasible.row(agent);
  std::fill(row.begin(), row.end(), 0);
  if (update) update(feasible, actions, assigned);
}

}  // namespace

Selection select(const LogitMatrix& logits, Mask feasible, const SelectionConfig& cfg, Rng& rng) {
  check_shapes(logits, feasible);
  if (!(cfg.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  const auto rows = feasible.rows();
  const auto cols = feasible.cols();
  if (cfg.defaults.size() != rows) throw std::invalid_argument("need one default action per agent");

  const Mask initial = feasible;
  const auto& L = logits.values;
  const double beta = cfg.temperature;

  Selection out;
  out.actions = cfg.defaults;
  std::vector<std::uint8_t> assigned(rows, 0);

  while (any_feasible(feasible)) {
    const double lse = log_normalizer(L, feasible, beta);
    std::size_t pick = 0;
    if (cfg.mode == DecodeMode::Greedy) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < feasible.data().size(); ++i) {
        if (feasible.data()[i] && L.data()[i] / beta > best) {
          best = L.data()[i] / beta;
          pick = i;
        }
      }
    } else {
      // Rounding can leave u >= cum; the last feasible cell absorbs it.
      const double u = rng.uniform01();
      double cum = 0.0;
      for (std::size_t i = 0; i < feasible.data().size(); ++i) {
        if (!feasible.data()[i]) continue;
        cum += std::exp(L.data()[i] / beta - lse);
        pick = i;
        if (u < cum) break;
      }
    }
    if (cfg.trace) {
      constexpr double kMasked = -std::numeric_limits<double>::infinity();
      double on = 0.0;
      double off = 0.0;
      for (std::size_t i = 0; i < feasible.data().size(); ++i) {
        const double z = feasible.data()[i] ? L.data()[i] / beta : kMasked;
        (feasible.data()[i] ? on : off) += std::exp(z - lse);
      }
      cfg.trace->feasible_mass.push_back(on);
      cfg.trace->masked_mass.push_back(off);
    }
    out.log_prob += L.data()[pick] / beta - lse;
    const int agent = static_cast<int>(pick / cols);
    const int action = static_cast<int>(pick % cols);
    out.order.push_back(agent);
    out.drawn.push_back(action);
    mark_assigned(feasible, out.actions, assigned, agent, action, cfg.mask_update);
  }

  if (cfg.progress != nullptr) {
    const Mask& progress = *cfg.progress;
    bool progressed = false;
    for (int m : out.order) {
      if (progress(m, out.actions[m])) progressed = true;
    }
    if (!progressed) {
      int agent = -1;
      for (std::size_t m = 0; m < rows; ++m) {
        bool has_cell = false;
        for (std::size_t a = 0; a < cols; ++a) has_cell |= progress(m, a) && initial(m, a);
        if (!has_cell) continue;
        auto load = [&](std::size_t i) { return cfg.utilization.empty() ? 0.0 : cfg.utilization[i]; };
        if (agent < 0 || load(m) < load(static_cast<std::size_t>(agent))) agent = static_cast<int>(m);
      }
      if (agent >= 0) {
        int best = -1;
        for (std::size_t a = 0; a < cols; ++a) {
          if (progress(agent, a) && initial(agent, a) && (best < 0 || L(agent, a) > L(agent, best))) {
            best = static_cast<int>(a);
          }
        }
        out.actions[agent] = best;
        out.override_agent = agent;
      }
    }
  }
  return out;
}

double joint_log_prob(const LogitMatrix& logits, Mask feasible, std::span<const int> actions,
                      std::span<const int> order, double temperature, const MaskUpdate& mask_update) {
  check_shapes(logits, feasible);
  const auto& L = logits.values;
  std::vector<int> replay(actions.begin(), actions.end());
  std::vector<std::uint8_t> assigned(feasible.rows(), 0);
  double total = 0.0;
  for (int agent : order) {
    const int action = actions[agent];
    if (!feasible(agent, action)) throw std::invalid_argument("replayed action is masked");
    total += L(agent, action) / temperature - log_normalizer(L, feasible, temperature);
    mark_assigned(feasible, replay, assigned, agent, action, mask_update);
  }
  return total;
}

void mask_update_shelf(Mask&, std::span<const int>, std::span<const std::uint8_t>) {}

void mask_update_sku(Mask& feasible, std::span<const int> actions, std::span<const std::uint8_t> assigned,
                     std::span<const int> locations) {
  const int dummy = static_cast<int>(feasible.cols()) - 1;
  for (std::size_t j = 0; j < assigned.size(); ++j) {
    if (!assigned[j] || actions[j] == dummy) continue;
    for (std::size_t i = 0; i < assigned.size(); ++i) {
      if (!assigned[i] && locations[i] == locations[j]) feasible(i, actions[j]) = 0;
    }
  }
}

MaskUpdate make_sku_mask_update(std::vector<int> locations) {
  return [locations = std::move(locations)](Mask& feasible, std::span<const int> actions,
                                           std::span<const std::uint8_t> assigned) {
    mask_update_sku(feasible, actions, assigned, locations);
  };
}

}  // namespace msprp
