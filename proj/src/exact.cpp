#include "msprp/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "msprp/env.hpp"
#include "msprp/errors.hpp"

namespace msprp {

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << c.name << ": " << (c.passed ? "PASS" : "FAIL");
    if (!c.detail.empty()) os << " " << c.detail;
    os << "\n";
  }
  return os.str();
}

namespace {

struct Checker {
  CheckResult result;
  explicit Checker(std::string name) { result.name = std::move(name); }
  void fail(const std::string& why) {
    if (result.passed) {
      result.passed = false;
      result.detail = why;
    }
  }
};

}  // namespace

ValidationReport validate(const Instance& inst, const Solution& sol) {
  const int agents = num_agents(inst);
  const int nv = inst.num_locations();
  const int np = inst.num_skus();

  Checker demand("demand"), supply("supply"), capacity("capacity"), depot("depot"), tours("tours"),
      duplicates("no_duplicate_pick"), objective("objective");

  std::vector<std::vector<int>> path(agents);
  for (int m = 0; m < agents; ++m) path[m] = {inst.home_station(m)};
  std::vector<long> load(agents, 0);
  std::vector<long> picked(np, 0);
  Matrix<long> taken(nv, np, 0);

  for (std::size_t t = 0; t < sol.steps.size(); ++t) {
    const auto& step = sol.steps[t];
    std::set<std::pair<int, int>> claimed;
    for (int m : step.pick_order) {
      if (m < 0 || m >= agents) {
        tours.fail("step " + std::to_string(t) + " references agent " + std::to_string(m));
        continue;
      }
      const int v = step.locations[m];
      if (v < 0 || v >= nv) {
        tours.fail("step " + std::to_string(t) + " agent " + std::to_string(m) + " at unknown location");
        continue;
      }
      if (v != path[m].back()) path[m].push_back(v);
      const int p = step.action.sku[m];
      const int y = step.quantities[m];
      const bool real = p >= 0 && p < np;
      if (!real) {
        if (y != 0) supply.fail("step " + std::to_string(t) + " agent " + std::to_string(m) + " picks without a SKU");
      } else {
        if (!claimed.insert({v, p}).second) {
          duplicates.fail("step " + std::to_string(t) + " pair (" + std::to_string(v) + ", " + std::to_string(p) +
                          ") chosen twice");
        }
        if (y < 0) supply.fail("negative quantity at step " + std::to_string(t));
        picked[p] += y;
        taken(v, p) += y;
        load[m] += y;
        if (load[m] > inst.capacity()) {
          capacity.fail("agent " + std::to_string(m) + " carries " + std::to_string(load[m]) + " > " +
                        std::to_string(inst.capacity()) + " at step " + std::to_string(t));
        }
      }
      if (inst.is_station(v)) load[m] = 0;
    }
  }

  for (int p = 0; p < np; ++p) {
    if (picked[p] != inst.demand()[p]) {
      demand.fail("sku " + std::to_string(p) + " picked " + std::to_string(picked[p]) + " of " +
                  std::to_string(inst.demand()[p]));
    }
  }
  for (int v = 0; v < nv; ++v) {
    for (int p = 0; p < np; ++p) {
      if (taken(v, p) > inst.supply()(v, p)) {
        supply.fail("location " + std::to_string(v) + " sku " + std::to_string(p) + " gave " +
                    std::to_string(taken(v, p)) + " of " + std::to_string(inst.supply()(v, p)));
      }
    }
  }

  if (static_cast<int>(sol.tours.size()) != agents) {
    tours.fail("expected " + std::to_string(agents) + " tours, got " + std::to_string(sol.tours.size()));
  }
  double longest = 0.0;
  for (int m = 0; m < agents; ++m) {
    const int home = inst.home_station(m);
    if (path[m].back() != home) depot.fail("agent " + std::to_string(m) + " does not end at its home station");
    if (m < static_cast<int>(sol.tours.size())) {
      const auto& reported = sol.tours[m];
      if (reported.empty() || reported.front() != home || reported.back() != home) {
        depot.fail("reported tour of agent " + std::to_string(m) + " does not start and end at home");
      }
      if (reported != path[m]) tours.fail("reported tour of agent " + std::to_string(m) + " differs from its picks");
    }
    longest = std::max(longest, tour_distance(inst, path[m]));
  }
  if (!(std::abs(sol.objective - longest) <= 1e-9)) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "reported " << sol.objective << ", recomputed " << longest;
    objective.fail(msg.str());
  }

  ValidationReport report;
  report.checks = {demand.result, supply.result,     capacity.result, depot.result,
                   tours.result,  duplicates.result, objective.result};
  return report;
}

namespace {

struct AgentOption {
  int shelf;
  int sku;
};

class BruteForce {
 public:
  BruteForce(const SearchLimits& limits, BruteForceOptions options)
      : limits_(limits), options_(options), start_(std::chrono::steady_clock::now()) {}

  void search(const State& s) {
    if (++nodes_ > limits_.node_budget) throw LimitError("brute force exceeded its node budget");
    if ((nodes_ & 0xFFF) == 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count() > limits_.time_budget_seconds) {
      throw LimitError("brute force exceeded its time budget");
    }
    if (is_terminal(s)) {
      const double obj = max_tour_length(s);
      if (!found_ || obj < best_objective_ - 1e-12) {
        found_ = true;
        best_objective_ = obj;
        best_steps_ = path_;
        best_tours_ = s.tours;
        best_lengths_ = s.tour_length;
      }
      return;
    }
    if (options_.prune) {
      if (found_ && lower_bound(s) >= best_objective_ - 1e-12) return;
      if (dominated(s)) return;
    }

    const Mask mask = shelf_mask(s);
    const int agents = s.num_agents();
    std::vector<std::vector<AgentOption>> options(agents);
    for (int m = 0; m < agents; ++m) options[m] = agent_options(s, mask, m);

    std::vector<int> pick(agents, 0);
    while (true) {
      expand(s, options, pick);
      int m = 0;
      while (m < agents && ++pick[m] == static_cast<int>(options[m].size())) pick[m++] = 0;
      if (m == agents) break;
    }
  }

  bool found() const { return found_; }
  double best_objective() const { return best_objective_; }
  std::uint64_t nodes() const { return nodes_; }
  std::vector<StepRecord> best_steps_;
  std::vector<std::vector<int>> best_tours_;
  std::vector<double> best_lengths_;

 private:
  // Idle (STAY + DUMMY) comes first; walking to a shelf is only worth it
  // with a real SKU, and re-selecting the current station is idle.
  std::vector<AgentOption> agent_options(const State& s, const Mask& mask, int m) const {
    const Instance& inst = *s.inst;
    const int stay = s.stay_column();
    const int dummy = s.dummy_column();
    std::vector<AgentOption> out;
    const auto row = mask.row(m);
    if (std::none_of(row.begin(), row.end(), [](auto f) { return f != 0; }) || mask(m, stay)) {
      out.push_back({stay, dummy});
    }
    for (int v = 0; v < inst.num_locations(); ++v) {
      if (!mask(m, v)) continue;
      if (inst.is_station(v)) {
        if (v != s.location[m]) out.push_back({v, dummy});
        continue;
      }
      for (int p = 0; p < inst.num_skus(); ++p) {
        if (s.supply(v, p) > 0 && s.demand[p] > 0) out.push_back({v, p});
      }
    }
    return out;
  }

  void expand(const State& s, const std::vector<std::vector<AgentOption>>& options, const std::vector<int>& pick) {
    const int agents = s.num_agents();
    const int stay = s.stay_column();
    const int dummy = s.dummy_column();
    JointAction action;
    action.shelf.resize(agents);
    action.sku.resize(agents);
    bool idle = true;
    for (int m = 0; m < agents; ++m) {
      const auto& opt = options[m][pick[m]];
      action.shelf[m] = opt.shelf;
      action.sku[m] = opt.sku;
      if (opt.shelf != stay) idle = false;
    }
    if (idle) return;
    for (int i = 0; i < agents; ++i) {
      for (int j = i + 1; j < agents; ++j) {
        if (action.sku[i] != dummy && action.sku[i] == action.sku[j] && action.shelf[i] == action.shelf[j]) return;
      }
    }

    const State s_prime = partial_transition(s, action.shelf);

    // The pick order only matters among agents sharing a SKU.
    std::vector<int> contested;
    for (int i = 0; i < agents; ++i) {
      if (action.sku[i] == dummy) continue;
      for (int j = 0; j < agents; ++j) {
        if (j != i && action.sku[j] == action.sku[i]) {
          contested.push_back(i);
          break;
        }
      }
    }
    std::vector<int> base;
    for (int i = 0; i < agents; ++i) {
      if (std::find(contested.begin(), contested.end(), i) == contested.end()) base.push_back(i);
    }
    std::sort(contested.begin(), contested.end());
    do {
      std::vector<int> order = contested;
      order.insert(order.end(), base.begin(), base.end());
      const auto y = pick_quantities(s_prime, order, action.sku);
      bool wasted = false;
      for (int m = 0; m < agents; ++m) wasted |= action.sku[m] != dummy && y[m] == 0;
      if (wasted) continue;

      StepRecord rec;
      rec.action = action;
      rec.pick_order = order;
      rec.locations = s_prime.location;
      rec.quantities = y;
      path_.push_back(std::move(rec));
      search(apply_picks(s_prime, action.sku, order));
      path_.pop_back();
    } while (std::next_permutation(contested.begin(), contested.end()));
  }

  static double lower_bound(const State& s) {
    double lb = 0.0;
    for (int m = 0; m < s.num_agents(); ++m) {
      lb = std::max(lb, s.tour_length[m] + s.inst->distance(s.location[m], s.inst->home_station(m)));
    }
    return lb;
  }

  // Agents with equal (home, location, capacity) are interchangeable; their
  // tour lengths are compared after sorting, which is sound for dominance.
  bool dominated(const State& s) {
    const int agents = s.num_agents();
    std::vector<std::tuple<int, int, int, double>> rows;
    for (int m = 0; m < agents; ++m) {
      rows.emplace_back(s.inst->home_station(m), s.location[m], s.capacity[m], s.tour_length[m]);
    }
    std::sort(rows.begin(), rows.end());
    std::vector<int> key(s.demand.begin(), s.demand.end());
    key.insert(key.end(), s.supply.data().begin(), s.supply.data().end());
    std::vector<double> lengths;
    for (const auto& [home, loc, cap, len] : rows) {
      key.push_back(home);
      key.push_back(loc);
      key.push_back(cap);
      lengths.push_back(len);
    }
    auto& seen = memo_[key];
    for (const auto& other : seen) {
      bool covers = true;
      for (int m = 0; m < agents && covers; ++m) covers = other[m] <= lengths[m] + 1e-12;
      if (covers) return true;
    }
    std::erase_if(seen, [&](const std::vector<double>& other) {
      for (int m = 0; m < agents; ++m) {
        if (lengths[m] > other[m]) return false;
      }
      return true;
    });
    seen.push_back(std::move(lengths));
    return false;
  }

  SearchLimits limits_;
  BruteForceOptions options_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t nodes_ = 0;
  bool found_ = false;
  double best_objective_ = 0.0;
  std::vector<StepRecord> path_;
  std::map<std::vector<int>, std::vector<std::vector<double>>> memo_;
};

}  // namespace

BruteForceResult brute_force(std::shared_ptr<const Instance> inst, const SearchLimits& limits,
                             BruteForceOptions options) {
  const int cells = inst->num_storage_locations();
  const int total = inst->total_demand();
  const int agents = num_agents(*inst);
  if (cells > limits.max_locations) {
    throw LimitError("instance has " + std::to_string(cells) + " storage locations; brute force allows " +
                     std::to_string(limits.max_locations));
  }
  if (total > limits.max_total_demand) {
    throw LimitError("total demand " + std::to_string(total) + " exceeds the brute-force limit of " +
                     std::to_string(limits.max_total_demand));
  }
  if (agents > limits.max_agents) {
    throw LimitError(std::to_string(agents) + " agents exceed the brute-force limit of " +
                     std::to_string(limits.max_agents));
  }

  const auto start = std::chrono::steady_clock::now();
  BruteForce search(limits, options);
  search.search(initial_state(inst));
  if (!search.found()) throw Error("brute force found no feasible solution");

  BruteForceResult out;
  out.nodes = search.nodes();
  Solution& sol = out.solution;
  sol.instance_id = inst->id();
  sol.steps = std::move(search.best_steps_);
  sol.tours = std::move(search.best_tours_);
  sol.objective = search.best_objective();
  for (double len : search.best_lengths_) sol.total_distance += len;
  sol.meta.policy = "brute_force";
  sol.meta.decode = options.prune ? "branch_and_bound" : "enumeration";
  sol.meta.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace msprp
