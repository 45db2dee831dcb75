#pragma once

#include "masched/error.hpp"
#include "masched/mine.hpp"
#include "masched/network.hpp"
#include "masched/smc.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace masched::cli {

enum Exit : int { kOk = 0, kUsage = 1, kModel = 2, kRuntime = 3, kConsistency = 4 };

// Bad flag combinations found after parsing (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelOptions {
  std::string model_path;
  std::string mine_config;
  std::string instance;
  bool fo = false;
  bool po = false;
  bool max = false;
  bool min = false;
  std::string reward;
  std::optional<double> shift;
};

struct LoadedModel {
  std::string model;     // "mine" or the model file stem
  std::string instance;  // catalog/config name, "-" for plain model files
  std::string mode;      // "FO" or "PO"
  std::optional<mine::MineConfig> mine;
  std::unique_ptr<Network> net;
  ObservationMap obs;
  Query query;
  std::unique_ptr<mine::ConservationMonitor> monitor;
};

// Model file named in parse diagnostics.
inline std::string diagnostic_source;

void add_model_options(CLI::App& app, ModelOptions& o);
LoadedModel load_model(const ModelOptions& o);
// A generated mine model in the given observation mode and direction.
LoadedModel load_mine(const mine::MineConfig& c, const std::string& mode, Direction direction);

struct SmcOptions {
  double rel_width = 0.01;
  double confidence = 0.95;
  double abs_width = 0.0;
  std::uint64_t n_min = 500;
  std::uint64_t batch = 250;
  std::uint64_t n_max = 100'000'000;
  std::uint64_t step_cap = 100'000'000;
};

void add_smc_options(CLI::App& app, SmcOptions& o);
SmcConfig make_smc(const SmcOptions& o, std::uint64_t seed, unsigned workers, const StateMonitor* monitor);

struct RunOptionsCli {
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
};

void add_run_options(CLI::App& app, RunOptionsCli& o);
// --seed, else MASCHED_SEED, else a fresh random seed; printed by the caller.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag);

// "10k", "3m", or the plain number.
std::string short_count(std::uint64_t n);
std::string format_double(double v);
void print_estimate(const Estimate& e);

struct ResultRow {
  std::string model;
  std::string instance;
  std::string policy;
  std::string direction;
  std::string mode;
  double mean = 0.0;
  double halfwidth = 0.0;
  std::uint64_t n = 0;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kResultsHeader = "model,instance,policy,direction,mode,mean,halfwidth,n,wall_time_ms,seed";
inline constexpr const char* kTreeHeader = "model,instance,config,direction,mode,seed,table_rows,tree_nodes";

void append_result(const std::string& path, const ResultRow& row);
std::vector<ResultRow> read_results(const std::string& path);

struct TreeRow {
  std::string model;
  std::string instance;
  std::string config;
  std::string direction;
  std::string mode;
  std::uint64_t seed = 0;
  std::size_t table_rows = 0;
  std::size_t tree_nodes = 0;
};

void append_tree_row(const std::string& path, const TreeRow& row);
std::vector<TreeRow> read_tree_rows(const std::string& path);

// Fresh private directory for logs and sort runs.
std::string make_work_dir(const std::string& parent);

// Registers the `bench` subcommand; its exit status lands in `status`.
void add_bench(CLI::App& app, int& status);

}  // namespace masched::cli
