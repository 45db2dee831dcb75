#pragma once

#include "masched/model.hpp"
#include "masched/policy.hpp"
#include "masched/rng.hpp"

#include <cstdint>
#include <span>
#include <utility>

namespace masched {

struct RunResult {
  double reward = 0.0;
  std::uint64_t steps = 0;
  double end_time = 0.0;
};

// Receives every probabilistic decision with at least two choices.
class DecisionSink {
 public:
  virtual ~DecisionSink() = default;
  virtual void record(std::span<const Value> obs, ActionId action) = 0;
};

// Called on every state a run visits (including the initial one).
class StateMonitor {
 public:
  virtual ~StateMonitor() = default;
  virtual void check(const State& s) const = 0;
};

struct RunOptions {
  std::uint64_t step_cap = 100'000'000;
  DecisionSink* sink = nullptr;
  const StateMonitor* monitor = nullptr;
};

// Sojourn ~ Exp(E) by inverse transform and a transition picked with probability rate/E.
std::pair<double, std::size_t> sample_markovian(std::span<const double> rates, Rng& rng);
// Index drawn from a discrete distribution (no draw for a single branch).
std::size_t sample_branch(std::span<const double> probabilities, Rng& rng);

// Reusable per-worker buffers for time-bounded runs.
class Simulator {
 public:
  Simulator(const Model& model, const ObservationMap& obs) : model_(model), obs_(obs) {}

  RunResult run(const Policy& policy, double bound, Rng& rng, const RunOptions& opts = {});

 private:
  const Model& model_;
  const ObservationMap& obs_;
  State state_;
  Enabled enabled_;
  std::vector<Value> obs_buf_;
};

RunResult run(const Model& model, const ObservationMap& obs, const Policy& policy, double bound, Rng& rng,
              const RunOptions& opts = {});

}  // namespace masched
