#pragma once

#include "masched/choice_log.hpp"
#include "masched/model.hpp"
#include "masched/policy.hpp"
#include "masched/smc.hpp"
#include "masched/strategy_table.hpp"

#include <string>

namespace masched {

struct ExtractOptions {
  std::string work_dir;    // per-worker logs and the merged log go here
  std::string sorted_log;  // optional: keep the sorted, deduplicated .sal here
  SortOptions sort;
  bool keep_logs = false;
};

struct ExtractResult {
  Estimate estimate;
  StrategyTable table;
  SortStats sort;
  std::uint64_t logged = 0;
};

// Final SMC pass with every worker logging its decisions, then concatenation and
// external sort/dedup into a strategy table.
ExtractResult extract_strategy(const Model& model, const ObservationMap& obs, const Policy& policy, double bound,
                               SmcConfig smc, const ExtractOptions& options);

}  // namespace masched
