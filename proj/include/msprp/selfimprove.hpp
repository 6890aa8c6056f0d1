#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "msprp/heuristic.hpp"
#include "msprp/instance.hpp"

namespace msprp::si {

struct SiConfig {
  int epochs = 50;
  int instances_per_epoch = 5000;  // N
  int samples = 100;               // alpha
  int batch_size = 2000;           // B
  int validation_size = 100;
  std::uint64_t seed = 0;
  GenParams generator;             // seed field is ignored; instance seeds are derived
  double temperature = 1.0;
  EnvOptions env;
  int jobs = 1;

  // Throws std::invalid_argument.
  void validate() const;
};

// A pseudo-optimal trajectory for one instance.
struct TrainingExample {
  std::shared_ptr<const Instance> instance;
  Solution solution;
};

// Replayed prefix a_{1:d} of a training example and the action that followed.
struct BatchItem {
  std::shared_ptr<const Instance> instance;
  State prefix;
  StepRecord next;
  int cut = 0;
};

class Learner {
 public:
  virtual ~Learner() = default;
  // Consumes one mini-batch. The target may change only between calls.
  virtual void update(std::span<const BatchItem> batch) = 0;
  // Current target policy (evaluated on the validation set).
  virtual std::shared_ptr<const Policy> target() const = 0;
  // Frozen copy of the target, kept as the best policy on promotion.
  virtual std::shared_ptr<const Policy> snapshot() const = 0;
};

// Never changes its policy.
class NoopLearner : public Learner {
 public:
  explicit NoopLearner(std::shared_ptr<const Policy> policy) : policy_(std::move(policy)) {}
  void update(std::span<const BatchItem>) override {}
  std::shared_ptr<const Policy> target() const override { return policy_; }
  std::shared_ptr<const Policy> snapshot() const override { return policy_; }

 private:
  std::shared_ptr<const Policy> policy_;
};

// Coordinate search over the greedy policy's sharpness and epsilon, moving
// to the neighbour with the lowest batch negative log-likelihood.
class ScalarTunerLearner : public Learner {
 public:
  explicit ScalarTunerLearner(GreedyParams start = {}, double temperature = 1.0, double step = 2.0);
  void update(std::span<const BatchItem> batch) override;
  std::shared_ptr<const Policy> target() const override;
  std::shared_ptr<const Policy> snapshot() const override { return target(); }
  const GreedyParams& params() const { return params_; }

 private:
  GreedyParams params_;
  double temperature_;
  double step_;
};

// Index of the highest reward; ties go to the first.
std::size_t curate(std::span<const double> rewards);

// Rebuilds the state after the first `cut` steps of a solution.
State replay_prefix(std::shared_ptr<const Instance> inst, const Solution& sol, int cut, EnvOptions env = {});

// log p(record | s) under `policy`, both stages, replaying the draw orders.
double step_log_prob(const Policy& policy, const State& s, const StepRecord& record, double temperature = 1.0);

// Mean greedy objective of `policy` on `instances`.
double greedy_mean_objective(const Policy& policy, std::span<const std::shared_ptr<const Instance>> instances,
                             EnvOptions env = {}, int jobs = 1);

struct EpochMetrics {
  int epoch = 0;                 // 1-based
  double mean_val_objective = 0; // target policy, greedy decode
  double best_objective = 0;     // best policy after gating
  std::size_t dataset_size = 0;  // after a possible reset
  bool promoted = false;
  bool aborted = false;
  std::string error;
  double wall_time = 0;
};

struct Report {
  double initial_objective = 0;  // best policy before epoch 1
  std::vector<EpochMetrics> epochs;
  std::shared_ptr<const Policy> best;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

Report run(Learner& learner, const SiConfig& cfg, const EpochCallback& on_epoch = {});

// CSV: epoch,mean_val_objective,dataset_size,promoted,wall_time
std::string metrics_csv(const Report& report);

}  // namespace msprp::si
