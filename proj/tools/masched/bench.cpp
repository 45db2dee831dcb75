#include "cli.hpp"

#include "masched/dtree.hpp"
#include "masched/extract.hpp"
#include "masched/parallel.hpp"
#include "masched/policy.hpp"
#include "masched/qlearning.hpp"
#include "masched/smart_sampling.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace masched::cli {

namespace {

namespace fs = std::filesystem;

struct BenchConfig {
  enum class Kind { Uniform, Lss, QLearn } kind = Kind::Uniform;
  std::string name;
  std::uint64_t strategies = 0;
  std::uint64_t budget = 0;
  std::uint64_t episodes = 0;
  Schedule alpha;
  Schedule epsilon;
};

std::uint64_t parse_count(const std::string& s) {
  if (s.empty()) throw UsageError("empty count");
  std::uint64_t scale = 1;
  std::string digits = s;
  if (s.back() == 'k') scale = 1000, digits.pop_back();
  else if (s.back() == 'm') scale = 1'000'000, digits.pop_back();
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    throw UsageError("bad count '" + s + "'");
  return std::stoull(digits) * scale;
}

// uniform, lss-<K>-<N>, qlearn-<episodes>
BenchConfig parse_config(const std::string& name) {
  BenchConfig c;
  c.name = name;
  if (name == "uniform") return c;
  if (name.rfind("lss-", 0) == 0) {
    const auto dash = name.find('-', 4);
    if (dash == std::string::npos) throw UsageError("bad configuration '" + name + "' (expected lss-K-N)");
    c.kind = BenchConfig::Kind::Lss;
    c.budget = parse_count(name.substr(4, dash - 4));
    c.strategies = parse_count(name.substr(dash + 1));
    if (c.strategies == 0 || c.strategies > c.budget) throw UsageError("bad configuration '" + name + "': need 1 <= N <= K");
    return c;
  }
  if (name.rfind("qlearn-", 0) == 0) {
    c.kind = BenchConfig::Kind::QLearn;
    c.episodes = parse_count(name.substr(7));
    if (c.episodes == 0) throw UsageError("bad configuration '" + name + "'");
    if (c.episodes >= 3'000'000) {
      c.alpha = Schedule{0.6, 0.01, c.episodes};
      c.epsilon = Schedule{0.6, 0.02, c.episodes};
    } else {
      c.alpha = Schedule{0.5, 0.02, c.episodes};
      c.epsilon = Schedule{1.0, 0.02, c.episodes};
    }
    return c;
  }
  throw UsageError("unknown configuration '" + name + "'");
}

struct BenchOptions {
  std::vector<std::string> instances;
  std::vector<std::string> configs{"uniform", "lss-10k-1k", "lss-100k-10k", "qlearn-100k", "qlearn-3m"};
  std::vector<std::string> modes{"FO", "PO"};
  std::vector<std::string> directions{"max", "min"};
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  std::string csv = "results.csv";
  std::string tree_csv;
  std::string work_dir;
  double memory_gib = 8.0;
  std::optional<double> shift;
  SmcOptions smc;
};

using Key = std::tuple<std::string, std::string, std::string, std::string, std::string, std::uint64_t>;

void stamp_instance(const std::string& csv, const mine::MineConfig& c) {
  const std::string path = csv + ".meta";
  const std::string tag = "[instance " + c.name + "]";
  {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line))
      if (line == tag) return;
  }
  std::ofstream out(path, std::ios::app);
  out << tag << '\n' << mine::format_config(c) << '\n';
  if (!out.flush()) throw IoError("cannot write " + path);
}

struct Outcome {
  Estimate estimate;
  std::optional<StrategyTable> table;
};

Outcome run_one(const LoadedModel& m, const BenchConfig& cfg, const BenchOptions& o, std::uint64_t seed,
                unsigned workers, bool want_table) {
  const SmcConfig smc = make_smc(o.smc, seed, workers, m.monitor.get());
  Outcome out;
  switch (cfg.kind) {
    case BenchConfig::Kind::Uniform: {
      UniformPolicy u;
      out.estimate = estimate(*m.net, m.obs, u, m.query.bound, smc);
      break;
    }
    case BenchConfig::Kind::Lss: {
      SmartSamplingConfig sc;
      sc.strategies = cfg.strategies;
      sc.budget = cfg.budget;
      sc.direction = m.query.direction;
      sc.seed = seed;
      sc.workers = workers;
      sc.run = smc.run;
      const SmartSamplingResult ss = run_smart_sampling(*m.net, m.obs, m.query.bound, sc);
      LssPolicy policy(ss.sigma);
      if (!want_table) {
        out.estimate = estimate(*m.net, m.obs, policy, m.query.bound, smc);
        break;
      }
      ExtractOptions eo;
      eo.work_dir = make_work_dir(o.work_dir);
      try {
        ExtractResult r = extract_strategy(*m.net, m.obs, policy, m.query.bound, smc, eo);
        out.estimate = r.estimate;
        out.table = std::move(r.table);
      } catch (...) {
        fs::remove_all(eo.work_dir);
        throw;
      }
      fs::remove_all(eo.work_dir);
      break;
    }
    case BenchConfig::Kind::QLearn: {
      QLearningConfig qc;
      qc.episodes = cfg.episodes;
      qc.alpha = cfg.alpha;
      qc.epsilon = cfg.epsilon;
      qc.direction = m.query.direction;
      qc.seed = seed;
      qc.key_mode = m.mode;
      qc.step_cap = o.smc.step_cap;
      qc.memory_cap_bytes = static_cast<std::size_t>(o.memory_gib * 1024 * 1024 * 1024);
      qc.monitor = m.monitor.get();
      const QTable q = run_qlearning(*m.net, m.obs, m.query.bound, qc);
      GreedyPolicy policy(q);
      out.estimate = estimate(*m.net, m.obs, policy, m.query.bound, smc);
      if (want_table) out.table = q.to_strategy();
      break;
    }
  }
  return out;
}

int bench(const BenchOptions& o) {
  if (o.instances.empty()) throw UsageError("--instance is required");
  std::vector<BenchConfig> configs;
  for (const auto& c : o.configs) configs.push_back(parse_config(c));
  for (const auto& m : o.modes)
    if (m != "FO" && m != "PO") throw UsageError("unknown mode '" + m + "'");
  for (const auto& d : o.directions) parse_direction(d);

  std::vector<std::uint64_t> seeds = o.seeds;
  if (seeds.empty()) seeds.push_back(resolve_seed(o.seed));
  const unsigned workers = resolve_workers(o.workers);
  for (auto s : seeds) std::printf("seed: %llu\n", static_cast<unsigned long long>(s));
  std::printf("workers: %u\n", workers);

  std::set<Key> done, trees;
  for (const auto& r : read_results(o.csv)) done.insert({r.model, r.instance, r.policy, r.direction, r.mode, r.seed});
  if (!o.tree_csv.empty())
    for (const auto& r : read_tree_rows(o.tree_csv))
      trees.insert({r.model, r.instance, r.config, r.direction, r.mode, r.seed});

  int failures = 0;
  for (const auto& name : o.instances) {
    mine::MineConfig mc;
    try {
      mc = mine::instance(std::stoi(name));
    } catch (const std::logic_error&) {
      throw ModelError("unknown instance '" + name + "'");
    }
    if (o.shift) mc.shift = *o.shift;
    mine::apply_defaults(mc);
    stamp_instance(o.csv, mc);

    for (const auto& mode : o.modes) {
      for (const auto& cfg : configs) {
        const bool tree_stats = !o.tree_csv.empty() && cfg.kind != BenchConfig::Kind::Uniform;
        const std::vector<std::string> dirs =
            cfg.kind == BenchConfig::Kind::Uniform ? std::vector<std::string>{"none"} : o.directions;
        for (const auto& dir : dirs) {
          const Direction d = dir == "none" ? Direction::Max : parse_direction(dir);
          std::optional<LoadedModel> model;
          for (const std::uint64_t seed : seeds) {
            const Key key{"mine", mc.name, cfg.name, dir, mode, seed};
            if (done.count(key) && (!tree_stats || trees.count(key))) {
              std::printf("skip  %s %s %s %s seed %llu\n", mc.name.c_str(), mode.c_str(), cfg.name.c_str(), dir.c_str(),
                          static_cast<unsigned long long>(seed));
              continue;
            }
            if (!model) model = load_mine(mc, mode, d);
            std::printf("run   %s %s %s %s seed %llu ... ", mc.name.c_str(), mode.c_str(), cfg.name.c_str(),
                        dir.c_str(), static_cast<unsigned long long>(seed));
            std::fflush(stdout);
            const auto t0 = std::chrono::steady_clock::now();
            ResultRow row{"mine", mc.name, cfg.name, dir, mode};
            row.seed = seed;
            std::optional<StrategyTable> table;
            try {
              Outcome out = run_one(*model, cfg, o, seed, workers, tree_stats);
              row.mean = out.estimate.mean;
              row.halfwidth = out.estimate.halfwidth;
              row.n = out.estimate.n;
              table = std::move(out.table);
            } catch (const ConsistencyError&) {
              throw;
            } catch (const Error& e) {
              row.mean = row.halfwidth = std::nan("");
              row.n = 0;
              ++failures;
              std::printf("failed\n");
              std::fprintf(stderr, "error: %s %s %s %s: %s\n", mc.name.c_str(), mode.c_str(), cfg.name.c_str(),
                           dir.c_str(), e.what());
            }
            row.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            if (!std::isnan(row.mean))
              std::printf("%.6g +- %.4g (n=%llu, %.0f ms)\n", row.mean, row.halfwidth,
                          static_cast<unsigned long long>(row.n), row.wall_time_ms);
            if (!done.count(key)) {
              append_result(o.csv, row);
              done.insert(key);
            }
            if (tree_stats && table && !trees.count(key)) {
              TreeRow tr{"mine", mc.name, cfg.name, dir, mode, seed, table->size(), 0};
              if (!table->empty()) tr.tree_nodes = learn_tree(*table).size();
              append_tree_row(o.tree_csv, tr);
              trees.insert(key);
            }
          }
        }
      }
    }
  }
  return failures == 0 ? kOk : kRuntime;
}

}  // namespace

void add_bench(CLI::App& app, int& status) {
  static BenchOptions o;
  auto* sub = app.add_subcommand("bench", "run the instance x configuration x FO/PO grid into a results CSV");
  sub->add_option("--instance", o.instances, "catalog instances")->delimiter(',')->required();
  sub->add_option("--configs", o.configs, "uniform, lss-K-N, qlearn-E (comma separated)")->delimiter(',');
  sub->add_option("--modes", o.modes, "FO, PO")->delimiter(',');
  sub->add_option("--directions", o.directions, "max, min")->delimiter(',');
  auto* seed = sub->add_option("--seed", o.seed, "random seed (default: $MASCHED_SEED, else random)");
  sub->add_option("--seeds", o.seeds, "several seeds")->delimiter(',')->excludes(seed);
  sub->add_option("-j,--jobs", o.workers, "worker threads (default: available CPUs)");
  sub->add_option("--csv", o.csv, "results CSV (appended; completed rows are skipped)");
  sub->add_option("--tree-csv", o.tree_csv, "also learn trees and append their statistics here");
  sub->add_option("--work-dir", o.work_dir, "directory for decision logs (default: system temp)");
  sub->add_option("--memory-cap", o.memory_gib, "Q-table memory cap in GiB")->check(CLI::PositiveNumber);
  sub->add_option("--shift", o.shift, "override SHIFT")->check(CLI::NonNegativeNumber);
  add_smc_options(*sub, o.smc);
  sub->callback([&status] { status = bench(o); });
}

}  // namespace masched::cli
