#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "msprp/errors.hpp"
#include "msprp/exact.hpp"
#include "msprp/heuristic.hpp"
#include "msprp/instance.hpp"
#include "msprp/neural.hpp"
#include "msprp/selfimprove.hpp"
#include "msprp/util.hpp"

namespace fs = std::filesystem;

namespace msprp::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::shared_ptr<const Instance> load_instance(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("instance file not found: " + path);
  auto inst = std::make_shared<const Instance>(deserialize(read_file(path)));
  return inst;
}

std::shared_ptr<const Policy> make_policy(const std::string& spec) {
  if (spec == "greedy") return std::make_shared<GreedyPolicy>();
  const std::string prefix = "neural:";
  if (spec.rfind(prefix, 0) != 0) throw UsageError("unknown policy '" + spec + "'");
  const std::string rest = spec.substr(prefix.size());
  if (rest.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(rest.substr(7));
    } catch (const std::exception&) {
      throw UsageError("bad seed in policy '" + spec + "'");
    }
    auto model = std::make_shared<const neural::Model>(neural::init_random(neural::NeuralConfig{}, seed));
    return std::make_shared<neural::NeuralPolicy>(model, spec);
  }
  if (!fs::exists(rest)) throw UsageError("weights file not found: " + rest);
  auto model = std::make_shared<const neural::Model>(neural::load_weights(rest));
  return std::make_shared<neural::NeuralPolicy>(model, spec);
}

std::string csv_header() { return "instance_id,policy,decode,samples,objective,seconds,seed\n"; }

std::string csv_row(const std::string& id, const std::string& policy, const std::string& decode, int samples,
                    double objective, double seconds, std::uint64_t seed) {
  char buf[96];
  std::snprintf(buf, sizeof buf, ",%d,%.9f,%.6f,%llu\n", samples, objective, seconds,
                static_cast<unsigned long long>(seed));
  return id + "," + policy + "," + decode + buf;
}

DecodeMode parse_mode(const std::string& mode) { return mode == "greedy" ? DecodeMode::Greedy : DecodeMode::Sample; }

struct SolveJob {
  std::shared_ptr<const Instance> inst;
  std::string stem;
};

struct SolveOutcome {
  Solution solution;
  double seconds = 0;
};

SolveOutcome solve_one(const Policy& policy, const SolveJob& job, int samples, const DecodeConfig& dc) {
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome o;
  o.solution = dc.mode == DecodeMode::Greedy ? rollout(policy, job.inst, dc) : sample_best(policy, job.inst, samples, dc);
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!validate(*job.inst, o.solution).ok()) throw Error("solver produced an invalid solution for " + job.stem);
  return o;
}

std::vector<SolveJob> jobs_from_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  std::vector<SolveJob> jobs;
  for (const auto& f : files) jobs.push_back({load_instance(f), fs::path(f).stem().string()});
  return jobs;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Min-max mixed-shelves picker routing toolkit", "msprp"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write random instances");
  std::string preset_name;
  int skus = 0, count = 1;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  gen->add_option("--preset", preset_name, "Warehouse family")->required()->envname("MSPRP_PRESET");
  gen->add_option("--skus", skus, "Number of SKUs (0 = smallest of the family)")->envname("MSPRP_SKUS");
  gen->add_option("--count", count, "Number of instances")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed, "Base seed")->required()->envname("MSPRP_SEED");
  gen->add_option("--out", out_dir, "Output directory");

  // solve
  auto* solve = app.add_subcommand("solve", "Construct solutions");
  std::vector<std::string> instance_files;
  std::string instance_dir;
  std::string policy_spec = "greedy";
  int samples = 1;
  std::string mode = "sample";
  double beta = 1.0;
  std::string solution_dir, csv_path;
  int jobs = 1;
  bool any_station = false;
  auto* solve_inst = solve->add_option("--instance", instance_files, "Instance file(s)");
  auto* solve_dir = solve->add_option("--dir", instance_dir, "Directory of instance files");
  solve_inst->excludes(solve_dir);
  solve->add_option("--policy", policy_spec, "greedy | neural:PATH | neural:random:SEED")->envname("MSPRP_POLICY");
  solve->add_option("--samples", samples, "Samples per instance")->check(CLI::PositiveNumber)->envname("MSPRP_SAMPLES");
  solve->add_option("--mode", mode, "Decoding")->check(CLI::IsMember({"sample", "greedy"}))->envname("MSPRP_MODE");
  solve->add_option("--beta", beta, "Sampling temperature")->check(CLI::PositiveNumber);
  auto* solve_seed = solve->add_option("--seed", seed, "Sampling seed")->envname("MSPRP_SEED");
  solve->add_option("--solutions", solution_dir, "Directory for solution files");
  solve->add_option("--csv", csv_path, "CSV output (default stdout)");
  solve->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->envname("MSPRP_JOBS");
  solve->add_flag("--any-station", any_station, "Allow unloading at any station");

  // validate
  auto* val = app.add_subcommand("validate", "Check a solution file");
  std::string instance_file, solution_file;
  val->add_option("--instance", instance_file)->required();
  val->add_option("--solution", solution_file)->required();

  // export-lp
  auto* lp = app.add_subcommand("export-lp", "Write the MILP model in LP format");
  std::string lp_out;
  lp->add_option("--instance", instance_file)->required();
  lp->add_option("--out", lp_out, "LP file (default stdout)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Solve a tiny instance exactly");
  SearchLimits limits;
  std::string oracle_out;
  oracle->add_option("--instance", instance_file)->required();
  oracle->add_option("--max-demand", limits.max_total_demand);
  oracle->add_option("--max-locations", limits.max_locations);
  oracle->add_option("--max-agents", limits.max_agents);
  oracle->add_option("--time-budget", limits.time_budget_seconds);
  oracle->add_option("--out", oracle_out, "Solution file");

  // selfimprove
  auto* si_cmd = app.add_subcommand("selfimprove", "Run the self-improvement loop");
  si::SiConfig si_cfg;
  si_cfg.epochs = 5;
  si_cfg.instances_per_epoch = 20;
  si_cfg.samples = 10;
  si_cfg.batch_size = 32;
  si_cfg.validation_size = 20;
  std::string learner_name = "noop", metrics_path, si_preset = "msprp10";
  int si_skus = 0;
  si_cmd->add_option("--epochs", si_cfg.epochs)->check(CLI::PositiveNumber);
  si_cmd->add_option("--alpha", si_cfg.samples)->check(CLI::PositiveNumber);
  si_cmd->add_option("--instances", si_cfg.instances_per_epoch)->check(CLI::PositiveNumber);
  si_cmd->add_option("--batch", si_cfg.batch_size)->check(CLI::PositiveNumber);
  si_cmd->add_option("--validation", si_cfg.validation_size)->check(CLI::PositiveNumber);
  si_cmd->add_option("--learner", learner_name)->check(CLI::IsMember({"noop", "tuner"}));
  si_cmd->add_option("--preset", si_preset);
  si_cmd->add_option("--skus", si_skus);
  si_cmd->add_option("--seed", si_cfg.seed)->required()->envname("MSPRP_SEED");
  si_cmd->add_option("--jobs", si_cfg.jobs)->check(CLI::PositiveNumber)->envname("MSPRP_JOBS");
  si_cmd->add_option("--metrics", metrics_path, "Metrics CSV (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Solve a directory with several policies");
  std::vector<std::string> policies{"greedy"};
  bench->add_option("--dir", instance_dir)->required();
  bench->add_option("--policies", policies)->delimiter(',');
  bench->add_option("--samples", samples)->check(CLI::PositiveNumber);
  bench->add_option("--mode", mode)->check(CLI::IsMember({"sample", "greedy"}));
  bench->add_option("--beta", beta)->check(CLI::PositiveNumber);
  auto* bench_seed = bench->add_option("--seed", seed)->envname("MSPRP_SEED");
  bench->add_option("--csv", csv_path);
  bench->add_option("--jobs", jobs)->check(CLI::PositiveNumber)->envname("MSPRP_JOBS");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  auto emit = [&](const std::string& path, const std::string& text) {
    if (path.empty()) {
      out << text;
    } else {
      write_file_atomic(path, text);
    }
  };

  try {
    if (*gen) {
      GenParams params;
      try {
        params = preset(preset_name, skus);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      fs::create_directories(out_dir);
      for (int i = 0; i < count; ++i) {
        params.seed = seed + static_cast<std::uint64_t>(i);
        const Instance inst = generate(params);
        const std::string path = (fs::path(out_dir) / ("seed" + std::to_string(params.seed) + ".json")).string();
        write_file_atomic(path, serialize(inst));
        out << path << "\n";
      }
      return kOk;
    }

    if (*solve || *bench) {
      const bool sampling = mode == "sample";
      if (sampling && (*solve ? solve_seed->count() : bench_seed->count()) == 0)
        throw UsageError("--seed is required for sampling");
      std::vector<SolveJob> todo;
      if (*solve) {
        if (instance_files.empty() && instance_dir.empty()) throw UsageError("give --instance or --dir");
        if (!instance_dir.empty()) todo = jobs_from_dir(instance_dir);
        for (const auto& f : instance_files) todo.push_back({load_instance(f), fs::path(f).stem().string()});
      } else {
        todo = jobs_from_dir(instance_dir);
      }
      DecodeConfig dc;
      dc.temperature = beta;
      dc.mode = parse_mode(mode);
      dc.seed = seed;
      dc.env.unload_at_any_station = any_station;
      const int eff_samples = sampling ? samples : 1;
      if (!solution_dir.empty()) fs::create_directories(solution_dir);

      std::string csv = csv_header();
      const std::vector<std::string> specs = *solve ? std::vector<std::string>{policy_spec} : policies;
      for (const auto& spec : specs) {
        const auto policy = make_policy(spec);
        std::vector<SolveOutcome> results(todo.size());
        parallel_for(todo.size(), jobs, [&](std::size_t i) { results[i] = solve_one(*policy, todo[i], eff_samples, dc); });
        double sum_obj = 0, sum_time = 0;
        for (std::size_t i = 0; i < todo.size(); ++i) {
          const auto& r = results[i];
          csv += csv_row(todo[i].inst->id().empty() ? todo[i].stem : todo[i].inst->id(), spec, mode, eff_samples,
                         r.solution.objective, r.seconds, seed);
          sum_obj += r.solution.objective;
          sum_time += r.seconds;
          if (!solution_dir.empty()) {
            const std::string name = todo[i].stem + (specs.size() > 1 ? "." + spec : "") + ".solution.json";
            write_file_atomic((fs::path(solution_dir) / name).string(), write_solution(r.solution));
          }
        }
        if (*bench && !todo.empty()) {
          const double n = static_cast<double>(todo.size());
          csv += csv_row("mean", spec, mode, eff_samples, sum_obj / n, sum_time / n, seed);
        }
      }
      emit(csv_path, csv);
      return kOk;
    }

    if (*val) {
      const auto inst = load_instance(instance_file);
      if (!fs::exists(solution_file)) throw UsageError("solution file not found: " + solution_file);
      const ValidationReport report = validate(*inst, read_solution(read_file(solution_file)));
      out << report.to_text();
      return report.ok() ? kOk : kFailed;
    }

    if (*lp) {
      const auto inst = load_instance(instance_file);
      emit(lp_out, export_lp(*inst));
      return kOk;
    }

    if (*oracle) {
      const auto inst = load_instance(instance_file);
      const BruteForceResult r = brute_force(inst, limits);
      out << "objective " << r.solution.objective << "\nnodes " << r.nodes << "\n";
      if (!oracle_out.empty()) write_file_atomic(oracle_out, write_solution(r.solution));
      return kOk;
    }

    if (*si_cmd) {
      try {
        si_cfg.generator = preset(si_preset, si_skus);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      std::unique_ptr<si::Learner> learner;
      if (learner_name == "tuner") {
        learner = std::make_unique<si::ScalarTunerLearner>();
      } else {
        learner = std::make_unique<si::NoopLearner>(std::make_shared<GreedyPolicy>());
      }
      const si::Report report = si::run(*learner, si_cfg, [&](const si::EpochMetrics& m) {
        if (m.aborted) err << "epoch " << m.epoch << " aborted: " << m.error << "\n";
      });
      emit(metrics_path, si::metrics_csv(report));
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  } catch (const LimitError& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  } catch (const InfeasibleActionError& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace msprp::cli
