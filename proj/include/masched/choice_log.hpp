#pragma once

#include "masched/sim.hpp"
#include "masched/strategy_table.hpp"
#include "masched/types.hpp"

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace masched {

// `.sal` strategy action log: 16-byte header (magic "MSAL", version, layout hash,
// record size; u32 little-endian) followed by fixed-size records. A record is the
// observation (int32 LE per variable, declaration order) then the action id (u16 LE).
struct SalHeader {
  static constexpr std::uint32_t kVersion = 1;
  std::uint32_t version = kVersion;
  std::uint32_t layout_hash = 0;
  std::uint32_t record_size = 0;
};

constexpr std::size_t kSalHeaderSize = 16;

inline std::uint32_t sal_record_size(std::size_t arity) { return static_cast<std::uint32_t>(4 * arity + 2); }

// Identifies the observation layout and action alphabet a log was written for.
std::uint32_t layout_hash(std::span<const std::string> variables, std::span<const std::string> actions);

SalHeader read_sal_header(const std::string& path);

void encode_record(std::span<const Value> obs, ActionId action, std::uint8_t* out);
void decode_record(const std::uint8_t* in, std::size_t arity, std::vector<Value>& obs, ActionId& action);
// Order on encoded records: observation lexicographic (signed), then action.
int compare_records(const std::uint8_t* a, const std::uint8_t* b, std::size_t arity);

// Per-worker append-only writer; no locking.
class ChoiceLogWriter final : public DecisionSink {
 public:
  ChoiceLogWriter(const std::string& path, std::size_t arity, std::uint32_t layout_hash);
  ~ChoiceLogWriter() override;
  ChoiceLogWriter(const ChoiceLogWriter&) = delete;
  ChoiceLogWriter& operator=(const ChoiceLogWriter&) = delete;

  void record(std::span<const Value> obs, ActionId action) override;
  void write_raw(const std::uint8_t* record);
  void close();

  std::uint64_t records() const noexcept { return records_; }
  const std::string& path() const noexcept { return path_; }

 private:
  void flush();
  std::string path_;
  std::FILE* file_ = nullptr;
  std::size_t arity_;
  std::uint32_t record_size_;
  std::vector<std::uint8_t> buffer_;
  std::size_t used_ = 0;
  std::uint64_t records_ = 0;
};

// Concatenates logs with identical headers into `output`.
void concatenate_logs(std::span<const std::string> inputs, const std::string& output);

struct SortStats {
  std::uint64_t input_records = 0;
  std::uint64_t output_records = 0;
  std::uint64_t chunks = 0;
  std::uint32_t merge_passes = 0;
};

struct SortOptions {
  std::size_t memory_budget = std::size_t{64} << 20;
  std::size_t fan_in = 64;
  std::string temp_dir;  // empty: next to the output
  bool keep_temp = false;
  std::vector<std::string> variable_names;  // for diagnostics only
  std::vector<std::string> action_names;    // for diagnostics only
};

// External merge sort with duplicate elimination. Sorted runs of memory_budget bytes
// are merged fan_in at a time with a loser tree. A repeated observation with a
// different action raises ConsistencyError naming the observation.
SortStats sort_dedup(const std::string& input, const std::string& output, const SortOptions& options = {});

// Reads every record (used for small logs and tests).
std::vector<std::uint8_t> read_log_records(const std::string& path, SalHeader* header = nullptr);

// Builds the table from a sorted, duplicate-free log.
StrategyTable table_from_log(const std::string& path, std::vector<std::string> variables,
                             std::vector<std::string> actions);

}  // namespace masched
