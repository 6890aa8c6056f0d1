#include "msprp/selfimprove.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "msprp/rng.hpp"
#include "msprp/util.hpp"

namespace msprp::si {

void SiConfig::validate() const {
  if (epochs < 1 || instances_per_epoch < 1 || samples < 1 || batch_size < 1 || validation_size < 1)
    throw std::invalid_argument("self-improvement sizes must be positive");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  generator.validate();
}

std::size_t curate(std::span<const double> rewards) {
  if (rewards.empty()) throw std::invalid_argument("curate needs at least one trajectory");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rewards.size(); ++i)
    if (rewards[i] > rewards[best]) best = i;
  return best;
}

State replay_prefix(std::shared_ptr<const Instance> inst, const Solution& sol, int cut, EnvOptions env) {
  if (cut < 0 || cut > static_cast<int>(sol.steps.size())) throw std::out_of_range("cut outside trajectory");
  State s = initial_state(std::move(inst), env);
  for (int k = 0; k < cut; ++k) {
    const StepRecord& r = sol.steps[static_cast<std::size_t>(k)];
    s = apply_picks(partial_transition(s, r.action.shelf), r.action.sku, r.pick_order);
  }
  return s;
}

double step_log_prob(const Policy& policy, const State& s, const StepRecord& record, double temperature) {
  const std::vector<int>& drawn = record.shelf_drawn.empty() ? record.action.shelf : record.shelf_drawn;
  double lp = joint_log_prob(policy.shelf_logits(s), shelf_mask(s), drawn, record.shelf_order, temperature);
  const State s_prime = partial_transition(s, record.action.shelf);
  lp += joint_log_prob(policy.sku_logits(s_prime), sku_selection_mask(s_prime), record.action.sku,
                       record.sku_order, temperature, make_sku_mask_update(s_prime.location));
  return lp;
}

double greedy_mean_objective(const Policy& policy, std::span<const std::shared_ptr<const Instance>> instances,
                             EnvOptions env, int jobs) {
  if (instances.empty()) return 0.0;
  std::vector<double> obj(instances.size());
  DecodeConfig dc;
  dc.mode = DecodeMode::Greedy;
  dc.env = env;
  parallel_for(instances.size(), jobs, [&](std::size_t i) { obj[i] = rollout(policy, instances[i], dc).objective; });
  return std::accumulate(obj.begin(), obj.end(), 0.0) / static_cast<double>(obj.size());
}

ScalarTunerLearner::ScalarTunerLearner(GreedyParams start, double temperature, double step)
    : params_(start), temperature_(temperature), step_(step) {
  if (!(step > 1.0)) throw std::invalid_argument("tuner step must exceed 1");
}

std::shared_ptr<const Policy> ScalarTunerLearner::target() const {
  return std::make_shared<GreedyPolicy>(params_);
}

void ScalarTunerLearner::update(std::span<const BatchItem> batch) {
  if (batch.empty()) return;
  auto nll = [&](const GreedyParams& p) {
    const GreedyPolicy policy(p);
    double total = 0.0;
    for (const auto& item : batch) total -= step_log_prob(policy, item.prefix, item.next, temperature_);
    return total / static_cast<double>(batch.size());
  };
  GreedyParams best = params_;
  double best_nll = nll(params_);
  std::vector<GreedyParams> neighbours;
  for (double f : {step_, 1.0 / step_}) {
    GreedyParams a = params_;
    a.sharpness *= f;
    neighbours.push_back(a);
    GreedyParams b = params_;
    b.epsilon *= f * f * f;
    neighbours.push_back(b);
  }
  for (const auto& cand : neighbours) {
    const double v = nll(cand);
    if (std::isfinite(v) && v < best_nll) {
      best_nll = v;
      best = cand;
    }
  }
  params_ = best;
}

namespace {

constexpr std::uint64_t kTrainSalt = 0x7261696EULL;
constexpr std::uint64_t kValidationSalt = 0x76616CULL;
constexpr std::uint64_t kBatchSalt = 0x626174ULL;
constexpr std::uint64_t kSampleSalt = 0x73616DULL;

std::shared_ptr<const Instance> make_instance(const GenParams& base, std::uint64_t seed) {
  GenParams p = base;
  p.seed = seed;
  return std::make_shared<const Instance>(generate(p));
}

}  // namespace

Report run(Learner& learner, const SiConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  std::vector<std::shared_ptr<const Instance>> validation;
  for (int i = 0; i < cfg.validation_size; ++i)
    validation.push_back(make_instance(cfg.generator, derive_seed(cfg.seed, kValidationSalt, i)));

  Report report;
  report.best = learner.snapshot();
  double best_mean = greedy_mean_objective(*report.best, validation, cfg.env, cfg.jobs);
  report.initial_objective = best_mean;
  std::vector<TrainingExample> dataset;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochMetrics m;
    m.epoch = epoch;

    std::vector<TrainingExample> fresh(static_cast<std::size_t>(cfg.instances_per_epoch));
    const Policy& best = *report.best;
    parallel_for(fresh.size(), cfg.jobs, [&](std::size_t i) {
      auto inst = make_instance(cfg.generator, derive_seed(cfg.seed ^ kTrainSalt, epoch, i));
      std::vector<Solution> candidates;
      std::vector<double> rewards;
      DecodeConfig dc;
      dc.temperature = cfg.temperature;
      dc.env = cfg.env;
      const std::uint64_t base = derive_seed(cfg.seed ^ kSampleSalt, epoch, i);
      for (int a = 0; a < cfg.samples; ++a) {
        dc.seed = sample_seed(base, a);
        candidates.push_back(rollout(best, inst, dc));
        rewards.push_back(candidates.back().reward());
      }
      fresh[i] = {inst, std::move(candidates[curate(rewards)])};
    });
    for (auto& ex : fresh) dataset.push_back(std::move(ex));

    try {
      Rng rng(derive_seed(cfg.seed ^ kBatchSalt, epoch, 0));
      std::vector<std::size_t> order(dataset.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
      for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(cfg.batch_size));
        std::vector<BatchItem> batch;
        for (std::size_t k = lo; k < hi; ++k) {
          const TrainingExample& ex = dataset[order[k]];
          const int steps = static_cast<int>(ex.solution.steps.size());
          // A one-step trajectory has no interior cut; its only action is used.
          const int cut = steps >= 2 ? static_cast<int>(rng.uniform_int(1, steps - 1)) : 0;
          batch.push_back({ex.instance, replay_prefix(ex.instance, ex.solution, cut, cfg.env),
                           ex.solution.steps[static_cast<std::size_t>(cut)], cut});
        }
        learner.update(batch);
      }

      const auto target = learner.target();
      m.mean_val_objective = greedy_mean_objective(*target, validation, cfg.env, cfg.jobs);
      if (m.mean_val_objective < best_mean) {
        best_mean = m.mean_val_objective;
        report.best = learner.snapshot();
        dataset.clear();
        m.promoted = true;
      }
    } catch (const std::exception& e) {
      m.aborted = true;
      m.error = e.what();
      m.mean_val_objective = best_mean;
    }
    m.best_objective = best_mean;
    m.dataset_size = dataset.size();
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return report;
}

std::string metrics_csv(const Report& report) {
  std::string out = "epoch,mean_val_objective,dataset_size,promoted,wall_time\n";
  char buf[160];
  for (const auto& m : report.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.9f,%zu,%d,%.3f\n", m.epoch, m.mean_val_objective, m.dataset_size,
                  m.promoted ? 1 : 0, m.wall_time);
    out += buf;
  }
  return out;
}

}  // namespace msprp::si
