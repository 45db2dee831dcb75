#include "cli.hpp"

#include "masched/dsl.hpp"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace masched::cli {

namespace fs = std::filesystem;

void add_model_options(CLI::App& app, ModelOptions& o) {
  auto* model = app.add_option("--model", o.model_path, "model file (.man)")->check(CLI::ExistingFile);
  auto* inst = app.add_option("--instance", o.instance, "mine catalog instance (4, 5, 9, 10, 35, 40, 80)");
  auto* cfg = app.add_option("--mine-config", o.mine_config, "mine configuration file")->check(CLI::ExistingFile);
  model->excludes(inst)->excludes(cfg);
  inst->excludes(cfg);
  auto* fo = app.add_flag("--fo", o.fo, "full observation: every variable is observable");
  app.add_flag("--po", o.po, "partial observation: declared observables only (default)")->excludes(fo);
  auto* mx = app.add_flag("--max", o.max, "maximise the property");
  app.add_flag("--min", o.min, "minimise the property")->excludes(mx);
  app.add_option("--reward", o.reward, "reward structure (default: the property's)");
  app.add_option("--shift,--bound", o.shift, "time bound T")->check(CLI::NonNegativeNumber);
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = '_';
  return s;
}

void finish(LoadedModel& m) {
  m.obs = m.mode == "FO" ? ObservationMap::all(*m.net) : ObservationMap::declared(*m.net);
  if (m.mine) m.monitor = std::make_unique<mine::ConservationMonitor>(*m.net, *m.mine);
}

}  // namespace

LoadedModel load_mine(const mine::MineConfig& c, const std::string& mode, Direction direction) {
  LoadedModel m;
  m.model = "mine";
  m.instance = sanitize(c.name);
  m.mode = mode;
  m.mine = c;
  m.query = mine::property_spec(c, direction);
  m.net = std::make_unique<Network>(load_network(mine::build_mine(c, direction), m.query.reward));
  finish(m);
  return m;
}

LoadedModel load_model(const ModelOptions& o) {
  if (o.model_path.empty() && o.instance.empty() && o.mine_config.empty())
    throw UsageError("one of --model, --instance or --mine-config is required");
  const std::string mode = o.fo ? "FO" : "PO";
  const Direction dir = o.min ? Direction::Min : Direction::Max;

  if (!o.model_path.empty()) {
    LoadedModel m;
    m.model = sanitize(fs::path(o.model_path).stem().string());
    m.instance = "-";
    m.mode = mode;
    diagnostic_source = o.model_path;
    const dsl::NetworkModel ast = dsl::parse_file(o.model_path);
    const std::optional<Query> declared = dsl::declared_query(ast);
    if (declared) m.query = *declared;
    if (!o.reward.empty()) m.query.reward = o.reward;
    if (o.shift) m.query.bound = *o.shift;
    if (o.max || o.min) m.query.direction = dir;
    if (m.query.reward.empty()) throw ModelError("no reward given and the model declares no property");
    if (!declared && !o.shift) throw ModelError("no time bound given and the model declares no property");
    m.net = std::make_unique<Network>(load_network(ast, m.query.reward));
    finish(m);
    return m;
  }

  mine::MineConfig c;
  if (!o.instance.empty()) {
    int name = 0;
    const auto [p, ec] = std::from_chars(o.instance.data(), o.instance.data() + o.instance.size(), name);
    if (ec != std::errc() || p != o.instance.data() + o.instance.size())
      throw ModelError("unknown instance '" + o.instance + "'");
    c = mine::instance(name);
  } else {
    c = mine::load_config(o.mine_config);
  }
  if (o.shift) c.shift = *o.shift;
  mine::apply_defaults(c);
  if (!o.reward.empty() && o.reward != "load") throw ModelError("mine models only define the reward 'load'");
  return load_mine(c, mode, dir);
}

void add_smc_options(CLI::App& app, SmcOptions& o) {
  app.add_option("--rel-width", o.rel_width, "relative confidence half-width")->check(CLI::NonNegativeNumber);
  app.add_option("--confidence", o.confidence, "confidence level")->check(CLI::Range(0.5, 0.999999));
  app.add_option("--abs-width", o.abs_width, "absolute half-width (0: off)")->check(CLI::NonNegativeNumber);
  app.add_option("--n-min", o.n_min, "minimum number of runs")->check(CLI::PositiveNumber);
  app.add_option("--batch", o.batch, "runs per batch")->check(CLI::PositiveNumber);
  app.add_option("--n-max", o.n_max, "maximum number of runs")->check(CLI::PositiveNumber);
  app.add_option("--step-cap", o.step_cap, "maximum transitions per run")->check(CLI::PositiveNumber);
}

SmcConfig make_smc(const SmcOptions& o, std::uint64_t seed, unsigned workers, const StateMonitor* monitor) {
  if (o.n_min > o.n_max) throw UsageError("--n-min exceeds --n-max");
  SmcConfig c;
  c.rel_halfwidth = o.rel_width;
  c.confidence = o.confidence;
  c.abs_halfwidth = o.abs_width;
  c.n_min = o.n_min;
  c.batch = o.batch;
  c.n_max = o.n_max;
  c.seed = seed;
  c.workers = workers;
  c.run.step_cap = o.step_cap;
  c.run.monitor = monitor;
  return c;
}

void add_run_options(CLI::App& app, RunOptionsCli& o) {
  app.add_option("--seed", o.seed, "random seed (default: $MASCHED_SEED, else random)");
  app.add_option("-j,--jobs", o.workers, "worker threads (default: available CPUs)");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MASCHED_SEED"); env && *env) {
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [p, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || p != end) throw UsageError(std::string("MASCHED_SEED is not a number: ") + env);
    return v;
  }
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string short_count(std::uint64_t n) {
  if (n >= 1'000'000 && n % 1'000'000 == 0) return std::to_string(n / 1'000'000) + "m";
  if (n >= 1000 && n % 1000 == 0) return std::to_string(n / 1000) + "k";
  return std::to_string(n);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_estimate(const Estimate& e) {
  std::printf("estimate: %.6g +- %.4g (n=%llu, confidence %g%s)\n", e.mean, e.halfwidth,
              static_cast<unsigned long long>(e.n), e.confidence, e.converged ? "" : ", not converged");
  std::printf("interval: [%.6g, %.6g]\n", e.mean - e.halfwidth, e.mean + e.halfwidth);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

template <class Row, class Fn>
std::vector<Row> read_csv(const std::string& path, const char* header, std::size_t columns, Fn parse_row) {
  std::vector<Row> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (line != header) throw IoError(path + ": unexpected header '" + line + "'");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != columns) throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                                           std::to_string(columns) + " fields");
    try {
      rows.push_back(parse_row(f));
    } catch (const std::logic_error&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return rows;
}

void append_line(const std::string& path, const char* header, const std::string& line) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write " + path);
  if (fresh) out << header << '\n';
  out << line << '\n';
  if (!out.flush()) throw IoError("cannot write " + path);
}

}  // namespace

void append_result(const std::string& path, const ResultRow& r) {
  std::ostringstream line;
  line << r.model << ',' << r.instance << ',' << r.policy << ',' << r.direction << ',' << r.mode << ','
       << format_double(r.mean) << ',' << format_double(r.halfwidth) << ',' << r.n << ','
       << format_double(r.wall_time_ms) << ',' << r.seed;
  append_line(path, kResultsHeader, line.str());
}

std::vector<ResultRow> read_results(const std::string& path) {
  return read_csv<ResultRow>(path, kResultsHeader, 10, [](const std::vector<std::string>& f) {
    ResultRow r{f[0], f[1], f[2], f[3], f[4]};
    r.mean = parse_double(f[5]);
    r.halfwidth = parse_double(f[6]);
    r.n = std::stoull(f[7]);
    r.wall_time_ms = parse_double(f[8]);
    r.seed = std::stoull(f[9]);
    return r;
  });
}

void append_tree_row(const std::string& path, const TreeRow& r) {
  std::ostringstream line;
  line << r.model << ',' << r.instance << ',' << r.config << ',' << r.direction << ',' << r.mode << ',' << r.seed
       << ',' << r.table_rows << ',' << r.tree_nodes;
  append_line(path, kTreeHeader, line.str());
}

std::vector<TreeRow> read_tree_rows(const std::string& path) {
  return read_csv<TreeRow>(path, kTreeHeader, 8, [](const std::vector<std::string>& f) {
    TreeRow r{f[0], f[1], f[2], f[3], f[4]};
    r.seed = std::stoull(f[5]);
    r.table_rows = std::stoull(f[6]);
    r.tree_nodes = std::stoull(f[7]);
    return r;
  });
}

std::string make_work_dir(const std::string& parent) {
  static std::atomic<unsigned> counter{0};
  const fs::path base = parent.empty() ? fs::temp_directory_path() : fs::path(parent);
  for (;;) {
    const fs::path dir = base / ("masched-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(base);
    if (fs::create_directory(dir)) return dir.string();
  }
}

}  // namespace masched::cli
