#pragma once

#include "masched/strategy_table.hpp"
#include "masched/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace masched {

// Observation-keyed action values. Rows are created only for observations where a
// real choice (two or more enabled transitions) was made; absent entries read as 0.
class QTable {
 public:
  struct Entry {
    ActionId action;
    double value;
  };

  struct Meta {
    std::string key_mode = "PO";
    Direction direction = Direction::Max;
    std::uint64_t episodes = 0;
    std::string alpha;    // "initial final shape"
    std::string epsilon;  // "initial final shape"
    double gamma = 1.0;
  };

  QTable() = default;
  QTable(std::vector<std::string> variables, std::vector<std::string> actions, Meta meta);

  // Reads Q(obs, action); 0 if absent.
  double get(std::span<const Value> obs, ActionId action) const;
  const std::vector<Entry>* row(std::span<const Value> obs) const;
  // Writes Q(obs, action), creating the row/entry if needed.
  void set(std::span<const Value> obs, ActionId action, double value);
  // Entry for (obs, action), created with value 0 if absent.
  double& at(std::span<const Value> obs, ActionId action);

  std::size_t rows() const noexcept { return index_.size(); }
  std::size_t entries() const noexcept { return entries_; }
  // Rough resident size, used for the memory cap.
  std::size_t estimated_bytes() const noexcept;

  Meta& meta() noexcept { return meta_; }
  const Meta& meta() const noexcept { return meta_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<std::string>& actions() const noexcept { return actions_; }

  // Best stored action per row (argmax for max, argmin for min; ties to the entry
  // recorded first, i.e. the lowest enabled index).
  StrategyTable to_strategy() const;

  // Rows sorted by observation, entries in insertion order.
  std::vector<std::pair<Observation, std::vector<Entry>>> sorted_rows() const;

  void write(std::ostream& out) const;
  // `expect_key_mode` non-empty: a table stamped with another mode is rejected.
  static QTable read(std::istream& in, const std::string& expect_key_mode = {});
  void save(const std::string& path) const;
  static QTable load(const std::string& path, const std::string& expect_key_mode = {});

 private:
  std::vector<Entry>* row_mut(std::span<const Value> obs);

  std::vector<std::string> variables_;
  std::vector<std::string> actions_;
  Meta meta_;
  std::unordered_map<Observation, std::uint32_t> index_;
  std::vector<std::vector<Entry>> data_;
  std::size_t entries_ = 0;
};

// Index in `actions` of the best Q(obs, ·); missing entries count as 0, ties go to the
// lowest index.
std::size_t greedy_choose(const QTable& q, std::span<const Value> obs, std::span<const ActionId> actions,
                          Direction direction = Direction::Max);

}  // namespace masched
