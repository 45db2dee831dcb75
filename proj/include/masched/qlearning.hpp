#pragma once

#include "masched/model.hpp"
#include "masched/qtable.hpp"
#include "masched/rng.hpp"
#include "masched/sim.hpp"

#include <cstdint>
#include <string>

namespace masched {

// Linear decay from `initial` (episode 1) to `final` (episode `episodes`).
struct Schedule {
  double initial = 0.0;
  double final = 0.0;
  std::uint64_t episodes = 1;

  double value(std::uint64_t episode) const noexcept;
  std::string describe() const;  // "initial final linear"
};

struct QLearningConfig {
  std::uint64_t episodes = 100'000;
  Schedule alpha{0.5, 0.02, 100'000};
  Schedule epsilon{1.0, 0.02, 100'000};
  double gamma = 1.0;
  Direction direction = Direction::Max;
  std::uint64_t seed = 0;
  std::string key_mode = "PO";
  std::uint64_t step_cap = 100'000'000;
  std::size_t memory_cap_bytes = std::size_t{8} << 30;
  const StateMonitor* monitor = nullptr;
};

// Result of advancing through states without a real choice: Markovian states and
// probabilistic states with a single transition.
struct Advance {
  double reward = 0.0;
  bool reached = false;  // stopped at a state with >= 2 choices, within the bound
  std::uint64_t steps = 0;
};

// Moves `s` forward from time `t` until a state with at least two probabilistic
// transitions is reached or the bound expires; `e` holds that state's enabled set.
Advance advance_to_choice(const Model& model, State& s, double& t, double bound, Enabled& e, Rng& rng,
                          std::uint64_t step_cap = 100'000'000, const StateMonitor* monitor = nullptr);

// The generalised start of an episode: from the initial state to the first real choice.
inline Advance markovian_start_prefix(const Model& model, State& s, double& t, double bound, Enabled& e, Rng& rng,
                                      std::uint64_t step_cap = 100'000'000) {
  return advance_to_choice(model, s, t, bound, e, rng, step_cap);
}

// Tabular epsilon-greedy Q-learning; episode i uses stream (seed, stream_index(qlearning, i)).
QTable run_qlearning(const Model& model, const ObservationMap& obs, double bound, const QLearningConfig& config);

}  // namespace masched
