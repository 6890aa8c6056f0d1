#pragma once

#include <vector>

#include "msprp/env.hpp"
#include "msprp/neural.hpp"

namespace naive {

using Grid = std::vector<std::vector<double>>;

struct Forward {
  Grid locations, skus, agents;
  Grid shelf_logits, sku_logits;  // sku_logits use the same state
};

// Straight loops over the raw float tensors, no Eigen.
Forward run(const msprp::neural::WeightSet& w, const msprp::State& s);

double max_abs_diff(const Grid& a, const msprp::neural::Mat& b);
double max_abs_diff(const Grid& a, const msprp::Matrix<double>& b);

}  // namespace naive
