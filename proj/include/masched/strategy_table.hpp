#pragma once

#include "masched/types.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace masched {

// Deduplicated observation -> action rows, sorted lexicographically by observation.
// Actions are indices into actions(), normally the model's label list.
class StrategyTable {
 public:
  using Row = std::pair<Observation, ActionId>;

  StrategyTable() = default;
  StrategyTable(std::vector<std::string> variables, std::vector<std::string> actions);

  // Inserts a row; an equal row is a no-op, a different action for the same
  // observation raises ConsistencyError.
  void insert(Observation obs, ActionId action);
  // Fast path for rows arriving in strictly increasing observation order.
  void append_sorted(Observation obs, ActionId action);

  const ActionId* find(std::span<const Value> obs) const;

  const std::vector<Row>& rows() const noexcept { return rows_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<std::string>& actions() const noexcept { return actions_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  void write(std::ostream& out) const;
  static StrategyTable read(std::istream& in);
  void save(const std::string& path) const;
  static StrategyTable load(const std::string& path);

  friend bool operator==(const StrategyTable&, const StrategyTable&) = default;

 private:
  std::vector<std::string> variables_;
  std::vector<std::string> actions_;
  std::vector<Row> rows_;
};

// "(v1, v2, ...)" for diagnostics.
std::string format_observation(std::span<const Value> obs);

}  // namespace masched
