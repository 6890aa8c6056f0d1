#pragma once

#include <memory>
#include <span>
#include <vector>

#include "msprp/heuristic.hpp"
#include "msprp/instance.hpp"
#include "msprp/selfimprove.hpp"

namespace fixtures {

// Small enough for the exhaustive oracle: <= 4 storage cells, total demand
// <= 8, at most 2 agents.
inline msprp::GenParams tiny_params(std::uint64_t seed) {
  msprp::GenParams p;
  p.num_shelves = 3;
  p.num_storage_locations = 4;
  p.num_skus = 2;
  p.capacity = 4;
  p.mean_supply = 2.5;
  p.mean_demand = 2.5;
  p.seed = seed;
  return p;
}

inline std::shared_ptr<const msprp::Instance> tiny(std::uint64_t seed) {
  return std::make_shared<const msprp::Instance>(msprp::generate(tiny_params(seed)));
}

inline std::shared_ptr<const msprp::Instance> make(const msprp::GenParams& p) {
  return std::make_shared<const msprp::Instance>(msprp::generate(p));
}

// Walks to the farthest feasible location; a deliberately poor policy.
class FarthestPolicy : public msprp::Policy {
 public:
  std::string name() const override { return "farthest"; }
  msprp::LogitMatrix shelf_logits(const msprp::State& s) const override {
    msprp::LogitMatrix l = msprp::GreedyPolicy().shelf_logits(s);
    for (double& v : l.values.data()) v = -v;
    return l;
  }
  msprp::LogitMatrix sku_logits(const msprp::State& s) const override {
    return msprp::GreedyPolicy().sku_logits(s);
  }
};

// Scripted learner: serves FarthestPolicy until its `switch_at`-th update,
// then the nearest-shelf greedy policy.
class ScriptedLearner : public msprp::si::Learner {
 public:
  explicit ScriptedLearner(int switch_at) : switch_at_(switch_at) {}
  void update(std::span<const msprp::si::BatchItem> batch) override {
    ++updates_;
    seen_ += batch.size();
  }
  std::shared_ptr<const msprp::Policy> target() const override {
    if (updates_ >= switch_at_) return std::make_shared<msprp::GreedyPolicy>();
    return std::make_shared<FarthestPolicy>();
  }
  std::shared_ptr<const msprp::Policy> snapshot() const override { return target(); }
  int updates() const { return updates_; }
  std::size_t seen() const { return seen_; }

 private:
  int switch_at_;
  int updates_ = 0;
  std::size_t seen_ = 0;
};

}  // namespace fixtures
