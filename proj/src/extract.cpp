#include "masched/extract.hpp"

#include "masched/error.hpp"

#include <filesystem>
#include <memory>

namespace masched {

namespace fs = std::filesystem;

ExtractResult extract_strategy(const Model& model, const ObservationMap& obs, const Policy& policy, double bound,
                               SmcConfig smc, const ExtractOptions& options) {
  const fs::path dir = options.work_dir.empty() ? fs::temp_directory_path() : fs::path(options.work_dir);
  fs::create_directories(dir);
  const std::uint32_t hash = layout_hash(obs.names(), model.actions());
  const unsigned workers = std::max(1u, smc.workers);

  std::vector<std::unique_ptr<ChoiceLogWriter>> writers;
  std::vector<std::string> paths;
  smc.sinks.clear();
  for (unsigned w = 0; w < workers; ++w) {
    paths.push_back((dir / ("worker-" + std::to_string(w) + ".sal")).string());
    writers.push_back(std::make_unique<ChoiceLogWriter>(paths.back(), obs.arity(), hash));
    smc.sinks.push_back(writers.back().get());
  }

  ExtractResult result;
  result.estimate = estimate(model, obs, policy, bound, smc);
  for (auto& w : writers) {
    result.logged += w->records();
    w->close();
  }

  const std::string merged = (dir / "merged.sal").string();
  concatenate_logs(paths, merged);
  const std::string sorted = options.sorted_log.empty() ? (dir / "sorted.sal").string() : options.sorted_log;
  SortOptions sort = options.sort;
  if (sort.variable_names.empty()) sort.variable_names = obs.names();
  if (sort.action_names.empty()) sort.action_names = model.actions();
  if (sort.temp_dir.empty()) sort.temp_dir = dir.string();
  result.sort = sort_dedup(merged, sorted, sort);
  result.table = table_from_log(sorted, obs.names(), model.actions());

  if (!options.keep_logs) {
    for (const auto& p : paths) fs::remove(p);
    fs::remove(merged);
    if (options.sorted_log.empty()) fs::remove(sorted);
  }
  return result;
}

}  // namespace masched
