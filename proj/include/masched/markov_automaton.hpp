#pragma once

#include "masched/model.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace masched {

using StateIndex = std::uint32_t;

struct ProbBranch {
  double probability = 0.0;
  StateIndex target = 0;
  double reward = 0.0;
};

struct ProbTransition {
  ActionId action = 0;
  std::vector<ProbBranch> branches;
};

struct MarkovTransition {
  double rate = 0.0;
  StateIndex target = 0;
  double reward = 0.0;
};

// Explicit Markov automaton (S, s0, A, P, Q, rr, br) with branch rewards stored on
// the branches themselves. Used for small hand-built models and explored state spaces.
class MarkovAutomaton {
 public:
  MarkovAutomaton(std::vector<std::string> variables, std::vector<std::string> actions);

  // Adds a state with the given valuation (must be unique); returns its index.
  StateIndex add_state(State valuation, double rate_reward = 0.0);
  // Convenience for anonymous states: valuation is {index} over one variable.
  StateIndex add_state(double rate_reward = 0.0);

  // Distributions must sum to 1 within 1e-9; the weights are rescaled to an exact sum.
  void add_probabilistic(StateIndex s, ActionId action, std::vector<ProbBranch> branches);
  void add_markovian(StateIndex s, double rate, StateIndex target, double reward = 0.0);
  void set_initial(StateIndex s);
  void set_observable(std::vector<std::size_t> variable_indices) { observable_ = std::move(variable_indices); }

  std::size_t size() const noexcept { return valuations_.size(); }
  StateIndex initial() const noexcept { return initial_; }
  const State& valuation(StateIndex s) const { return valuations_.at(s); }
  // Returns size() if the valuation is not a state.
  StateIndex find(const State& valuation) const;

  const std::vector<ProbTransition>& probabilistic(StateIndex s) const { return prob_.at(s); }
  const std::vector<MarkovTransition>& markovian(StateIndex s) const { return markov_.at(s); }
  double rate_reward(StateIndex s) const { return rate_reward_.at(s); }

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<std::string>& actions() const noexcept { return actions_; }
  const std::vector<std::size_t>& observable() const noexcept { return observable_; }

 private:
  std::vector<std::string> variables_;
  std::vector<std::string> actions_;
  std::vector<std::size_t> observable_;
  std::vector<State> valuations_;
  std::unordered_map<State, StateIndex> index_;
  std::vector<std::vector<ProbTransition>> prob_;
  std::vector<std::vector<MarkovTransition>> markov_;
  std::vector<double> rate_reward_;
  StateIndex initial_ = 0;
};

// E(s): sum of the Markovian rates leaving s (0 if none).
double exit_rate(const MarkovAutomaton& ma, StateIndex s);

// Drops the Markovian transitions of every state that has a probabilistic one.
MarkovAutomaton maximal_progress(const MarkovAutomaton& ma);

// True iff s has neither probabilistic nor Markovian transitions.
bool deadlock_check(const MarkovAutomaton& ma, StateIndex s);

// Model view of an explicit automaton; maximal progress applied on the fly.
class ExplicitModel final : public Model {
 public:
  explicit ExplicitModel(MarkovAutomaton ma);

  const MarkovAutomaton& automaton() const noexcept { return ma_; }

  const std::vector<std::string>& variables() const override { return ma_.variables(); }
  const std::vector<std::string>& actions() const override { return ma_.actions(); }
  std::vector<std::size_t> observable_variables() const override { return ma_.observable(); }
  State initial_state() const override { return ma_.valuation(ma_.initial()); }
  void enabled(const State& s, Enabled& out) const override;
  double take(State& s, const Enabled& e, std::size_t transition, std::size_t branch) const override;
  double rate_reward(const State& s) const override;

 private:
  StateIndex index_of(const State& s) const;
  MarkovAutomaton ma_;
};

// Breadth-first exploration of the reachable state space of `model` (maximal progress
// applied). Throws ResourceError beyond `max_states`. Intended for small models and tests.
MarkovAutomaton explore(const Model& model, std::size_t max_states = 1'000'000);

}  // namespace masched
