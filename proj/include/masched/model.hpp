#pragma once

#include "masched/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace masched {

// Transitions enabled in one state after maximal progress: either a non-empty
// probabilistic set, a Markovian set, or nothing (deadlock). Filled by Model::enabled;
// callers keep one instance per worker and reuse it across steps.
struct Enabled {
  // Probabilistic transitions, in the model's fixed order.
  std::vector<ActionId> actions;
  std::vector<std::uint32_t> branch_begin;  // size = actions.size() + 1
  std::vector<double> branch_prob;

  // Markovian transitions.
  std::vector<double> rates;

  // Implementation handles: transition i (probabilistic or Markovian) owns
  // parts[part_begin[i] .. part_begin[i+1]).
  std::vector<std::uint32_t> part_begin;
  std::vector<std::uint32_t> parts;

  std::vector<std::uint8_t> scratch;
  std::vector<std::uint32_t> work;
  std::vector<std::uint32_t> work_offsets;

  void clear() {
    actions.clear();
    branch_begin.assign(1, 0);
    branch_prob.clear();
    rates.clear();
    part_begin.assign(1, 0);
    parts.clear();
  }

  bool probabilistic() const noexcept { return !actions.empty(); }
  bool deadlock() const noexcept { return actions.empty() && rates.empty(); }
  std::size_t choice_count() const noexcept { return actions.size(); }

  std::span<const double> branches(std::size_t transition) const {
    return {branch_prob.data() + branch_begin[transition], branch_prob.data() + branch_begin[transition + 1]};
  }

  std::span<const std::uint32_t> parts_of(std::size_t transition) const {
    return {parts.data() + part_begin[transition], parts.data() + part_begin[transition + 1]};
  }

  double exit_rate() const noexcept {
    double sum = 0.0;
    for (double r : rates) sum += r;
    return sum;
  }
};

// On-the-fly semantics of a closed Markov automaton. Implementations are immutable
// and safe for concurrent use; all per-run state lives in State/Enabled owned by the caller.
class Model {
 public:
  virtual ~Model() = default;

  virtual const std::vector<std::string>& variables() const = 0;
  virtual const std::vector<std::string>& actions() const = 0;
  // Variables carrying the `observable` marker (indices into variables()).
  virtual std::vector<std::size_t> observable_variables() const = 0;

  virtual State initial_state() const = 0;

  // Maximal progress applied: Markovian transitions are listed only if no
  // probabilistic transition is enabled.
  virtual void enabled(const State& s, Enabled& out) const = 0;

  // Takes transition `transition` (branch `branch` for probabilistic ones) of the set
  // last computed for `s`, updating `s` in place. Returns the branch reward.
  virtual double take(State& s, const Enabled& e, std::size_t transition, std::size_t branch) const = 0;

  virtual double rate_reward(const State& s) const = 0;
};

// Maps states onto observations by keeping a fixed list of variables.
class ObservationMap {
 public:
  ObservationMap() = default;

  // Every variable (full observability).
  static ObservationMap all(const Model& m);
  // The variables marked observable in the model.
  static ObservationMap declared(const Model& m);
  // An explicit list; unknown names raise ModelError.
  static ObservationMap of(const Model& m, std::span<const std::string> names);

  void project(const State& s, std::vector<Value>& out) const;
  Observation observe(const State& s) const;

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t arity() const noexcept { return indices_.size(); }

 private:
  std::vector<std::size_t> indices_;
  std::vector<std::string> names_;
};

}  // namespace masched
