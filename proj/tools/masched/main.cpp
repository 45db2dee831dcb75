#include "cli.hpp"

#include "masched/choice_log.hpp"
#include "masched/dtree.hpp"
#include "masched/extract.hpp"
#include "masched/parallel.hpp"
#include "masched/policy.hpp"
#include "masched/qlearning.hpp"
#include "masched/smart_sampling.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace masched;
using namespace masched::cli;

namespace {

namespace fs = std::filesystem;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw IoError("cannot write " + path);
}

struct SortCli {
  double memory_mib = 64;
  std::size_t fan_in = 64;
  std::string work_dir;
  bool keep_temp = false;
};

void add_sort_options(CLI::App& app, SortCli& o) {
  app.add_option("--mem-budget", o.memory_mib, "sort memory budget in MiB")->check(CLI::PositiveNumber);
  app.add_option("--fan-in", o.fan_in, "runs merged per pass")->check(CLI::Range(2, 1 << 16));
  app.add_option("--work-dir", o.work_dir, "directory for logs and sort runs (default: system temp)");
  app.add_flag("--keep-temp", o.keep_temp, "keep logs and sort runs");
}

SortOptions make_sort(const SortCli& o) {
  SortOptions s;
  s.memory_budget = static_cast<std::size_t>(o.memory_mib * 1024 * 1024);
  s.fan_in = o.fan_in;
  s.keep_temp = o.keep_temp;
  return s;
}

ResultRow result_row(const LoadedModel& m, std::string policy, std::string direction, const Estimate& e,
                     double wall_ms, std::uint64_t seed) {
  return ResultRow{m.model, m.instance, std::move(policy), std::move(direction), m.mode,
                   e.mean, e.halfwidth, e.n, wall_ms, seed};
}

void print_model(const LoadedModel& m) {
  std::printf("model: %s instance: %s mode: %s\n", m.model.c_str(), m.instance.c_str(), m.mode.c_str());
  std::printf("query: X%s[T == %g](S(%s))\n", std::string(to_string(m.query.direction)).c_str(), m.query.bound,
              m.query.reward.c_str());
}

// Runs the final SMC pass, logging decisions into a strategy table when `table_out` is set.
Estimate final_pass(const LoadedModel& m, const Policy& policy, const SmcConfig& smc, const std::string& table_out,
                    const std::string& sorted_log, const SortCli& sort) {
  if (table_out.empty()) return estimate(*m.net, m.obs, policy, m.query.bound, smc);
  ExtractOptions eo;
  eo.work_dir = make_work_dir(sort.work_dir);
  eo.sorted_log = sorted_log;
  eo.sort = make_sort(sort);
  eo.keep_logs = sort.keep_temp;
  ExtractResult r;
  try {
    r = extract_strategy(*m.net, m.obs, policy, m.query.bound, smc, eo);
  } catch (...) {
    if (!sort.keep_temp) fs::remove_all(eo.work_dir);
    throw;
  }
  if (!sort.keep_temp) fs::remove_all(eo.work_dir);
  r.table.save(table_out);
  std::printf("strategy: %zu rows from %llu decisions -> %s\n", r.table.size(),
              static_cast<unsigned long long>(r.logged), table_out.c_str());
  return r.estimate;
}

struct Common {
  ModelOptions model;
  SmcOptions smc;
  RunOptionsCli run;
  std::string csv;
};

void add_common(CLI::App& sub, Common& c) {
  add_model_options(sub, c.model);
  add_smc_options(sub, c.smc);
  add_run_options(sub, c.run);
  sub.add_option("--csv", c.csv, "append a results row to this CSV");
}

struct Prepared {
  LoadedModel model;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  SmcConfig smc;
};

Prepared prepare(const Common& c) {
  Prepared p;
  p.model = load_model(c.model);
  p.seed = resolve_seed(c.run.seed);
  p.workers = resolve_workers(c.run.workers);
  p.smc = make_smc(c.smc, p.seed, p.workers, p.model.monitor.get());
  print_model(p.model);
  std::printf("seed: %llu\n", static_cast<unsigned long long>(p.seed));
  std::printf("workers: %u\n", p.workers);
  std::fflush(stdout);
  return p;
}

void add_check(CLI::App& app, int& status) {
  static Common c;
  auto* sub = app.add_subcommand("check", "estimate the property under the uniform random scheduler");
  add_common(*sub, c);
  sub->callback([&status] {
    Prepared p = prepare(c);
    const auto t0 = Clock::now();
    UniformPolicy u;
    const Estimate e = estimate(*p.model.net, p.model.obs, u, p.model.query.bound, p.smc);
    const double ms = elapsed_ms(t0);
    print_estimate(e);
    std::printf("time: %.0f ms\n", ms);
    if (!c.csv.empty()) append_result(c.csv, result_row(p.model, "uniform", "none", e, ms, p.seed));
    status = kOk;
  });
}

void add_lss(CLI::App& app, int& status) {
  static Common c;
  static std::uint64_t n = 1000, k = 10000;
  static std::string trace, table, sorted;
  static SortCli sort;
  auto* sub = app.add_subcommand("lss", "lightweight scheduler sampling with smart sampling");
  add_common(*sub, c);
  sub->add_option("-N,--strategies", n, "number of sampled strategies")->check(CLI::PositiveNumber);
  sub->add_option("-K,--budget", k, "simulation runs per round")->check(CLI::PositiveNumber);
  sub->add_option("--trace-rounds", trace, "write the per-round log (CSV) here");
  sub->add_option("--table", table, "extract the strategy of the final pass into this .strat file");
  sub->add_option("--sorted-log", sorted, "keep the sorted decision log here");
  add_sort_options(*sub, sort);
  sub->callback([&status] {
    if (n > k) throw UsageError("-N must not exceed -K");
    Prepared p = prepare(c);
    const auto t0 = Clock::now();
    SmartSamplingConfig sc;
    sc.strategies = n;
    sc.budget = k;
    sc.direction = p.model.query.direction;
    sc.seed = p.seed;
    sc.workers = p.workers;
    sc.run = p.smc.run;
    const SmartSamplingResult ss = run_smart_sampling(*p.model.net, p.model.obs, p.model.query.bound, sc);
    std::printf("sigma: %u (%u rounds, %llu runs)\n", ss.sigma, ss.rounds,
                static_cast<unsigned long long>(ss.total_runs));
    if (!trace.empty()) {
      std::ofstream out(trace);
      write_round_log(out, ss);
      if (!out.flush()) throw IoError("cannot write " + trace);
    }
    LssPolicy policy(ss.sigma);
    const Estimate e = final_pass(p.model, policy, p.smc, table, sorted, sort);
    const double ms = elapsed_ms(t0);
    print_estimate(e);
    std::printf("time: %.0f ms\n", ms);
    const std::string name = "lss-" + short_count(k) + "-" + short_count(n);
    if (!c.csv.empty())
      append_result(c.csv, result_row(p.model, name, std::string(to_string(sc.direction)), e, ms, p.seed));
    status = kOk;
  });
}

void add_qlearn(CLI::App& app, int& status) {
  static Common c;
  static std::uint64_t episodes = 100'000;
  static std::vector<double> alpha{0.5, 0.02}, epsilon{1.0, 0.02};
  static double gamma = 1.0, memory_gib = 8.0;
  static std::string qtable, table;
  auto* sub = app.add_subcommand("qlearn", "tabular Q-learning, then evaluate the greedy strategy");
  add_common(*sub, c);
  sub->add_option("--episodes", episodes, "training episodes")->check(CLI::PositiveNumber);
  sub->add_option("--alpha", alpha, "learning rate: initial final")->expected(2);
  sub->add_option("--epsilon", epsilon, "exploration rate: initial final")->expected(2);
  sub->add_option("--gamma", gamma, "discount")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--memory-cap", memory_gib, "Q-table memory cap in GiB")->check(CLI::PositiveNumber);
  sub->add_option("--qtable", qtable, "dump the Q-table here");
  sub->add_option("--table", table, "export the greedy strategy as a .strat file");
  sub->callback([&status] {
    Prepared p = prepare(c);
    const auto t0 = Clock::now();
    QLearningConfig qc;
    qc.episodes = episodes;
    qc.alpha = Schedule{alpha[0], alpha[1], episodes};
    qc.epsilon = Schedule{epsilon[0], epsilon[1], episodes};
    qc.gamma = gamma;
    qc.direction = p.model.query.direction;
    qc.seed = p.seed;
    qc.key_mode = p.model.mode;
    qc.step_cap = c.smc.step_cap;
    qc.memory_cap_bytes = static_cast<std::size_t>(memory_gib * 1024 * 1024 * 1024);
    qc.monitor = p.model.monitor.get();
    const QTable q = run_qlearning(*p.model.net, p.model.obs, p.model.query.bound, qc);
    std::printf("q-table: %zu rows, %zu entries\n", q.rows(), q.entries());
    if (!qtable.empty()) q.save(qtable);
    if (!table.empty()) q.to_strategy().save(table);
    GreedyPolicy policy(q);
    const Estimate e = estimate(*p.model.net, p.model.obs, policy, p.model.query.bound, p.smc);
    const double ms = elapsed_ms(t0);
    print_estimate(e);
    std::printf("time: %.0f ms\n", ms);
    if (!c.csv.empty())
      append_result(c.csv, result_row(p.model, "qlearn-" + short_count(episodes),
                                      std::string(to_string(qc.direction)), e, ms, p.seed));
    status = kOk;
  });
}

struct PolicySource {
  std::optional<std::uint32_t> sigma;
  std::string table;
  std::string qtable;
};

void add_policy_source(CLI::App& sub, PolicySource& s) {
  auto* a = sub.add_option("--sigma", s.sigma, "lightweight strategy identifier");
  auto* b = sub.add_option("--strategy", s.table, "strategy table (.strat)")->check(CLI::ExistingFile);
  auto* q = sub.add_option("--qtable", s.qtable, "Q-table dump; its greedy strategy is used")->check(CLI::ExistingFile);
  a->excludes(b)->excludes(q);
  b->excludes(q);
}

struct LoadedPolicy {
  StrategyTable table;
  QTable q;
  std::unique_ptr<Policy> policy;
  const TablePolicy* table_policy = nullptr;
};

LoadedPolicy load_policy(const PolicySource& s, const LoadedModel& m) {
  LoadedPolicy p;
  if (s.sigma) {
    p.policy = std::make_unique<LssPolicy>(*s.sigma);
  } else if (!s.table.empty()) {
    p.table = StrategyTable::load(s.table);
    auto tp = std::make_unique<TablePolicy>(p.table, *m.net, m.obs);
    p.table_policy = tp.get();
    p.policy = std::move(tp);
  } else if (!s.qtable.empty()) {
    p.q = QTable::load(s.qtable, m.mode);
    if (p.q.variables() != m.obs.names() || p.q.actions() != m.net->actions())
      throw ModelError("Q-table " + s.qtable + " was learnt on a different model or observation mode");
    p.policy = std::make_unique<GreedyPolicy>(p.q);
  } else {
    throw UsageError("one of --sigma, --strategy or --qtable is required");
  }
  return p;
}

void add_replay(CLI::App& app, int& status) {
  static Common c;
  static PolicySource src;
  auto* sub = app.add_subcommand("replay", "estimate the property under a stored strategy");
  add_common(*sub, c);
  add_policy_source(*sub, src);
  sub->callback([&status] {
    Prepared p = prepare(c);
    const LoadedPolicy lp = load_policy(src, p.model);
    const auto t0 = Clock::now();
    const Estimate e = estimate(*p.model.net, p.model.obs, *lp.policy, p.model.query.bound, p.smc);
    const double ms = elapsed_ms(t0);
    print_estimate(e);
    if (lp.table_policy)
      std::printf("table misses: %llu\n", static_cast<unsigned long long>(lp.table_policy->misses()));
    std::printf("time: %.0f ms\n", ms);
    if (!c.csv.empty())
      append_result(c.csv, result_row(p.model, "replay", std::string(to_string(p.model.query.direction)), e, ms,
                                      p.seed));
    status = kOk;
  });
}

void add_extract(CLI::App& app, int& status) {
  static Common c;
  static PolicySource src;
  static std::vector<std::string> logs;
  static std::string out, sorted;
  static SortCli sort;
  auto* sub = app.add_subcommand("extract", "build a strategy table from decision logs or a final SMC pass");
  add_common(*sub, c);
  add_policy_source(*sub, src);
  sub->add_option("--log", logs, "existing .sal decision logs (skips simulation)")->check(CLI::ExistingFile);
  sub->add_option("--out", out, "strategy table to write (.strat)")->required();
  sub->add_option("--sorted-log", sorted, "keep the sorted decision log here");
  add_sort_options(*sub, sort);
  sub->callback([&status] {
    if (logs.empty()) {
      Prepared p = prepare(c);
      const LoadedPolicy lp = load_policy(src, p.model);
      const Estimate e = final_pass(p.model, *lp.policy, p.smc, out, sorted, sort);
      print_estimate(e);
      status = kOk;
      return;
    }
    if (src.sigma || !src.table.empty() || !src.qtable.empty())
      throw UsageError("--log cannot be combined with a strategy source");
    const LoadedModel m = load_model(c.model);
    print_model(m);
    const std::uint32_t hash = layout_hash(m.obs.names(), m.net->actions());
    for (const auto& l : logs)
      if (read_sal_header(l).layout_hash != hash)
        throw ModelError(l + " was written for a different model or observation mode");
    const std::string dir = make_work_dir(sort.work_dir);
    const std::string merged = (fs::path(dir) / "merged.sal").string();
    const std::string sorted_path = sorted.empty() ? (fs::path(dir) / "sorted.sal").string() : sorted;
    SortOptions so = make_sort(sort);
    so.temp_dir = dir;
    so.variable_names = m.obs.names();
    so.action_names = m.net->actions();
    SortStats stats;
    StrategyTable table;
    try {
      concatenate_logs(logs, merged);
      stats = sort_dedup(merged, sorted_path, so);
      table = table_from_log(sorted_path, m.obs.names(), m.net->actions());
    } catch (...) {
      if (!sort.keep_temp) fs::remove_all(dir);
      throw;
    }
    if (!sort.keep_temp) fs::remove_all(dir);
    table.save(out);
    std::printf("records: %llu in, %llu out (%llu runs, %u merge passes)\n",
                static_cast<unsigned long long>(stats.input_records),
                static_cast<unsigned long long>(stats.output_records), static_cast<unsigned long long>(stats.chunks),
                stats.merge_passes);
    std::printf("strategy: %zu rows -> %s\n", table.size(), out.c_str());
    status = kOk;
  });
}

void add_tree(CLI::App& app, int& status) {
  static std::string table, dot, out;
  auto* sub = app.add_subcommand("tree", "learn a decision tree from a strategy table");
  sub->add_option("--table", table, "strategy table (.strat)")->required()->check(CLI::ExistingFile);
  sub->add_option("--dot", dot, "write the tree in Graphviz format");
  sub->add_option("--out", out, "write the serialized tree");
  sub->callback([&status] {
    const StrategyTable t = StrategyTable::load(table);
    const DecisionTree tree = learn_tree(t);
    std::printf("rows: %zu\nnodes: %zu\nleaves: %zu\ndepth: %zu\n", t.size(), tree.size(), tree.leaves(),
                tree.depth());
    std::string vars;
    for (const auto& v : tree.variables_used()) vars += (vars.empty() ? "" : " ") + v;
    std::printf("variables: %s\n", vars.c_str());
    if (!dot.empty()) write_text(dot, tree.to_dot());
    if (!out.empty()) write_text(out, tree.serialize());
    status = kOk;
  });
}

void add_mine_gen(CLI::App& app, int& status) {
  static std::string instance, config, out;
  static bool min = false, print_config = false, validate = false, list = false;
  auto* sub = app.add_subcommand("mine-gen", "generate the open-pit mine model");
  auto* i = sub->add_option("--instance", instance, "catalog instance");
  sub->add_option("--config", config, "configuration file")->check(CLI::ExistingFile)->excludes(i);
  sub->add_option("--out", out, "write the model here (default: standard output)");
  sub->add_flag("--min", min, "emit the minimisation property");
  sub->add_flag("--print-config", print_config, "print the effective configuration instead of the model");
  sub->add_flag("--validate-catalog", validate, "check the catalog's combination counts");
  sub->add_flag("--list", list, "list catalog instances");
  sub->callback([&status] {
    if (list) {
      for (int n : mine::instance_names()) std::printf("%d\n", n);
      status = kOk;
      return;
    }
    if (validate) {
      bool ok = true;
      for (const auto& r : mine::validate_catalog()) {
        std::printf("%-3d %-15s expected %-3d formula %-3d model %-3d %s\n", r.instance, r.row.c_str(), r.expected,
                    r.formula, r.model, r.ok() ? "ok" : "MISMATCH");
        ok = ok && r.ok();
      }
      status = ok ? kOk : kModel;
      return;
    }
    if (instance.empty() && config.empty()) throw UsageError("--instance or --config is required");
    mine::MineConfig c;
    if (!instance.empty()) {
      try {
        c = mine::instance(std::stoi(instance));
      } catch (const std::logic_error&) {
        throw ModelError("unknown instance '" + instance + "'");
      }
    } else {
      c = mine::load_config(config);
    }
    mine::apply_defaults(c);
    mine::validate(c);
    const std::string text =
        print_config ? mine::format_config(c) : mine::generate(c, min ? Direction::Min : Direction::Max);
    if (out.empty())
      std::fputs(text.c_str(), stdout);
    else
      write_text(out, text);
    status = kOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masched: statistical model checking and strategy synthesis for Markov automata"};
  app.require_subcommand(1);
  int status = kOk;
  add_check(app, status);
  add_lss(app, status);
  add_qlearn(app, status);
  add_extract(app, status);
  add_tree(app, status);
  add_replay(app, status);
  add_mine_gen(app, status);
  add_bench(app, status);
  try {
    app.parse(argc, argv);
    return status;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const ParseError& e) {
    if (e.diagnostics().empty()) std::fprintf(stderr, "model error: %s\n", e.what());
    const std::string where = diagnostic_source.empty() ? "" : diagnostic_source + ":";
    for (const auto& d : e.diagnostics())
      std::fprintf(stderr, "%s%d:%d: %s\n", where.c_str(), d.line, d.column, d.message.c_str());
    return kModel;
  } catch (const ModelError& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return kModel;
  } catch (const ConsistencyError& e) {
    std::fprintf(stderr, "consistency error: %s\n", e.what());
    return kConsistency;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
}
