#pragma once

#include <functional>
#include <span>
#include <vector>

#include "msprp/matrix.hpp"
#include "msprp/rng.hpp"

namespace msprp {

enum class Subspace { Shelf, Sku };
enum class DecodeMode { Sample, Greedy };

// M x |A_d| unnormalized log-probabilities.
struct LogitMatrix {
  Matrix<double> values;
  Subspace subspace = Subspace::Shelf;
};

// Subspace-specific mask refinement applied after every draw. `assigned[m]`
// is 1 once agent m has been drawn.
using MaskUpdate = std::function<void(Mask& feasible, std::span<const int> actions,
                                      std::span<const std::uint8_t> assigned)>;

// Per-iteration diagnostics: probability mass on feasible and masked cells.
struct SelectionTrace {
  std::vector<double> feasible_mass;
  std::vector<double> masked_mass;
};

struct SelectionConfig {
  double temperature = 1.0;
  DecodeMode mode = DecodeMode::Sample;
  std::vector<int> defaults;
  MaskUpdate mask_update;

  // Optional progress guard. When set and no drawn action lies in `progress`,
  // the agent with the lowest `utilization` that has a progress cell gets its
  // highest-logit progress cell instead.
  const Mask* progress = nullptr;
  std::vector<double> utilization;

  SelectionTrace* trace = nullptr;
};

struct Selection {
  std::vector<int> actions;
  std::vector<int> order;  // realized draw order, a permutation prefix
  std::vector<int> drawn;  // action each drawn agent received from the draw itself
  double log_prob = 0.0;
  int override_agent = -1;
};

// Sequential action selection from the joint agent x action logit space.
// Throws std::invalid_argument on shape mismatches or non-finite logits in
// feasible cells.
Selection select(const LogitMatrix& logits, Mask feasible, const SelectionConfig& cfg, Rng& rng);

// Log-probability of replaying (actions, order) under the same mask
// evolution. `actions[m]` must be the drawn action of agent m.
double joint_log_prob(const LogitMatrix& logits, Mask feasible, std::span<const int> actions,
                      std::span<const int> order, double temperature, const MaskUpdate& mask_update = {});

// Shelf subspace: agents may share shelves, nothing else to mask.
void mask_update_shelf(Mask& feasible, std::span<const int> actions, std::span<const std::uint8_t> assigned);

// SKU subspace: a real SKU taken at a location is masked for every unassigned
// agent standing at the same location. The DUMMY column is never masked.
void mask_update_sku(Mask& feasible, std::span<const int> actions, std::span<const std::uint8_t> assigned,
                     std::span<const int> locations);

MaskUpdate make_sku_mask_update(std::vector<int> locations);

}  // namespace msprp
