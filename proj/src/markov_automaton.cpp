#include "masched/markov_automaton.hpp"

#include "masched/error.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <string>

namespace masched {

// ---------------------------------------------------------------- ObservationMap

ObservationMap ObservationMap::all(const Model& m) {
  ObservationMap map;
  for (std::size_t i = 0; i < m.variables().size(); ++i) {
    map.indices_.push_back(i);
    map.names_.push_back(m.variables()[i]);
  }
  return map;
}

ObservationMap ObservationMap::declared(const Model& m) {
  ObservationMap map;
  for (std::size_t i : m.observable_variables()) {
    map.indices_.push_back(i);
    map.names_.push_back(m.variables().at(i));
  }
  return map;
}

ObservationMap ObservationMap::of(const Model& m, std::span<const std::string> names) {
  ObservationMap map;
  for (const auto& name : names) {
    const auto& vars = m.variables();
    std::size_t i = 0;
    while (i < vars.size() && vars[i] != name) ++i;
    if (i == vars.size()) throw ModelError("observation declaration: unknown variable '" + name + "'");
    map.indices_.push_back(i);
    map.names_.push_back(name);
  }
  return map;
}

void ObservationMap::project(const State& s, std::vector<Value>& out) const {
  out.resize(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) out[i] = s.values[indices_[i]];
}

Observation ObservationMap::observe(const State& s) const {
  Observation o;
  project(s, o.values);
  return o;
}

// ---------------------------------------------------------------- MarkovAutomaton

MarkovAutomaton::MarkovAutomaton(std::vector<std::string> variables, std::vector<std::string> actions)
    : variables_(std::move(variables)), actions_(std::move(actions)) {}

StateIndex MarkovAutomaton::add_state(State valuation, double rate_reward) {
  if (valuation.values.size() != variables_.size()) throw ModelError("state valuation has wrong arity");
  if (!(rate_reward >= 0.0)) throw ModelError("rate reward must be non-negative");
  const auto idx = static_cast<StateIndex>(valuations_.size());
  if (!index_.emplace(valuation, idx).second) throw ModelError("duplicate state valuation");
  valuations_.push_back(std::move(valuation));
  prob_.emplace_back();
  markov_.emplace_back();
  rate_reward_.push_back(rate_reward);
  return idx;
}

StateIndex MarkovAutomaton::add_state(double rate_reward) {
  if (variables_.size() != 1) throw ModelError("anonymous states need exactly one state variable");
  return add_state(State{{static_cast<Value>(valuations_.size())}}, rate_reward);
}

void MarkovAutomaton::add_probabilistic(StateIndex s, ActionId action, std::vector<ProbBranch> branches) {
  if (s >= size()) throw ModelError("unknown source state");
  if (action >= actions_.size()) throw ModelError("unknown action");
  if (branches.empty()) throw ModelError("empty distribution");
  double sum = 0.0;
  for (const auto& b : branches) {
    if (!(b.probability >= 0.0)) throw ModelError("negative branch probability");
    if (!(b.reward >= 0.0)) throw ModelError("negative branch reward");
    if (b.target >= size()) throw ModelError("unknown target state");
    sum += b.probability;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ModelError("distribution does not sum to 1");
  for (auto& b : branches) b.probability /= sum;
  prob_[s].push_back(ProbTransition{action, std::move(branches)});
}

void MarkovAutomaton::add_markovian(StateIndex s, double rate, StateIndex target, double reward) {
  if (s >= size() || target >= size()) throw ModelError("unknown state");
  if (!(rate > 0.0)) throw ModelError("rates must be strictly positive");
  if (!(reward >= 0.0)) throw ModelError("negative branch reward");
  markov_[s].push_back(MarkovTransition{rate, target, reward});
}

void MarkovAutomaton::set_initial(StateIndex s) {
  if (s >= size()) throw ModelError("unknown initial state");
  initial_ = s;
}

StateIndex MarkovAutomaton::find(const State& valuation) const {
  auto it = index_.find(valuation);
  return it == index_.end() ? static_cast<StateIndex>(size()) : it->second;
}

double exit_rate(const MarkovAutomaton& ma, StateIndex s) {
  double sum = 0.0;
  for (const auto& t : ma.markovian(s)) sum += t.rate;
  return sum;
}

MarkovAutomaton maximal_progress(const MarkovAutomaton& ma) {
  MarkovAutomaton out(ma.variables(), ma.actions());
  out.set_observable(ma.observable());
  for (StateIndex s = 0; s < ma.size(); ++s) out.add_state(ma.valuation(s), ma.rate_reward(s));
  for (StateIndex s = 0; s < ma.size(); ++s) {
    for (const auto& t : ma.probabilistic(s)) out.add_probabilistic(s, t.action, t.branches);
    if (!ma.probabilistic(s).empty()) continue;
    for (const auto& t : ma.markovian(s)) out.add_markovian(s, t.rate, t.target, t.reward);
  }
  out.set_initial(ma.initial());
  return out;
}

bool deadlock_check(const MarkovAutomaton& ma, StateIndex s) {
  return ma.probabilistic(s).empty() && ma.markovian(s).empty();
}

// ---------------------------------------------------------------- ExplicitModel

ExplicitModel::ExplicitModel(MarkovAutomaton ma) : ma_(std::move(ma)) {}

StateIndex ExplicitModel::index_of(const State& s) const {
  const StateIndex idx = ma_.find(s);
  if (idx == ma_.size()) throw SimulationError("state is not part of the automaton");
  return idx;
}

void ExplicitModel::enabled(const State& s, Enabled& out) const {
  out.clear();
  const StateIndex idx = index_of(s);
  const auto& prob = ma_.probabilistic(idx);
  for (std::uint32_t i = 0; i < prob.size(); ++i) {
    out.actions.push_back(prob[i].action);
    for (const auto& b : prob[i].branches) out.branch_prob.push_back(b.probability);
    out.branch_begin.push_back(static_cast<std::uint32_t>(out.branch_prob.size()));
    out.parts.push_back(i);
    out.part_begin.push_back(static_cast<std::uint32_t>(out.parts.size()));
  }
  if (!prob.empty()) return;
  const auto& markov = ma_.markovian(idx);
  for (std::uint32_t i = 0; i < markov.size(); ++i) {
    out.rates.push_back(markov[i].rate);
    out.parts.push_back(i);
    out.part_begin.push_back(static_cast<std::uint32_t>(out.parts.size()));
  }
}

double ExplicitModel::take(State& s, const Enabled& e, std::size_t transition, std::size_t branch) const {
  const StateIndex idx = index_of(s);
  const std::uint32_t original = e.parts_of(transition)[0];
  if (e.probabilistic()) {
    const auto& b = ma_.probabilistic(idx)[original].branches.at(branch);
    s = ma_.valuation(b.target);
    return b.reward;
  }
  const auto& t = ma_.markovian(idx)[original];
  s = ma_.valuation(t.target);
  return t.reward;
}

double ExplicitModel::rate_reward(const State& s) const { return ma_.rate_reward(index_of(s)); }

// ---------------------------------------------------------------- explore

MarkovAutomaton explore(const Model& model, std::size_t max_states) {
  MarkovAutomaton ma(model.variables(), model.actions());
  ma.set_observable(model.observable_variables());

  auto intern = [&](const State& s, std::deque<StateIndex>& frontier) {
    StateIndex idx = ma.find(s);
    if (idx == ma.size()) {
      if (ma.size() >= max_states) throw ResourceError("explore: more than " + std::to_string(max_states) + " states");
      idx = ma.add_state(s, model.rate_reward(s));
      frontier.push_back(idx);
    }
    return idx;
  };

  std::deque<StateIndex> frontier;
  ma.set_initial(intern(model.initial_state(), frontier));
  Enabled en;
  while (!frontier.empty()) {
    const StateIndex idx = frontier.front();
    frontier.pop_front();
    const State source = ma.valuation(idx);
    model.enabled(source, en);
    if (en.probabilistic()) {
      for (std::size_t t = 0; t < en.choice_count(); ++t) {
        std::vector<ProbBranch> branches;
        const auto probs = en.branches(t);
        for (std::size_t b = 0; b < probs.size(); ++b) {
          State target = source;
          const double reward = model.take(target, en, t, b);
          branches.push_back(ProbBranch{probs[b], intern(target, frontier), reward});
        }
        ma.add_probabilistic(idx, en.actions[t], std::move(branches));
      }
    } else {
      for (std::size_t t = 0; t < en.rates.size(); ++t) {
        State target = source;
        const double reward = model.take(target, en, t, 0);
        ma.add_markovian(idx, en.rates[t], intern(target, frontier), reward);
      }
    }
  }
  return ma;
}

}  // namespace masched
