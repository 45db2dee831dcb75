#include "masched/qlearning.hpp"

#include "masched/error.hpp"
#include "masched/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace masched {

double Schedule::value(std::uint64_t episode) const noexcept {
  if (episodes <= 1 || episode <= 1) return initial;
  if (episode >= episodes) return final;
  const double frac = static_cast<double>(episode - 1) / static_cast<double>(episodes - 1);
  return std::lerp(initial, final, frac);
}

std::string Schedule::describe() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g %.17g linear", initial, final);
  return buf;
}

Advance advance_to_choice(const Model& model, State& s, double& t, double bound, Enabled& e, Rng& rng,
                          std::uint64_t step_cap, const StateMonitor* monitor) {
  Advance adv;
  while (t <= bound) {
    model.enabled(s, e);
    if (e.deadlock()) throw SimulationError("deadlock at t=" + std::to_string(t));
    if (e.probabilistic()) {
      if (e.choice_count() > 1) {
        adv.reached = true;
        return adv;
      }
      adv.reward += model.take(s, e, 0, sample_branch(e.branches(0), rng));
      ++adv.steps;
    } else {
      const auto [sojourn, which] = sample_markovian(e.rates, rng);
      const double rr = model.rate_reward(s);
      if (rr != 0.0) adv.reward += std::min(sojourn, bound - t) * rr;
      if (t + sojourn <= bound) {
        adv.reward += model.take(s, e, which, 0);
        ++adv.steps;
      }
      t += sojourn;
    }
    if (monitor) monitor->check(s);
    if (adv.steps > step_cap) throw SimulationError("step cap of " + std::to_string(step_cap) + " exceeded");
  }
  return adv;
}

namespace {

double best_value(const QTable& q, std::span<const Value> obs, std::span<const ActionId> actions, Direction d) {
  const auto* row = q.row(obs);
  if (!row) return 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    double v = 0.0;
    for (const auto& en : *row)
      if (en.action == actions[i]) v = en.value;
    if (i == 0 || better(d, v, best)) best = v;
  }
  return best;
}

}  // namespace

QTable run_qlearning(const Model& model, const ObservationMap& obs, double bound, const QLearningConfig& config) {
  if (config.episodes < 1) throw std::invalid_argument("Q-learning needs at least one episode");
  if (!(config.gamma > 0.0 && config.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");

  QTable::Meta meta;
  meta.key_mode = config.key_mode;
  meta.direction = config.direction;
  meta.episodes = config.episodes;
  meta.alpha = config.alpha.describe();
  meta.epsilon = config.epsilon.describe();
  meta.gamma = config.gamma;
  QTable q(obs.names(), model.actions(), meta);

  State s;
  Enabled e;
  std::vector<Value> key;
  std::vector<Value> next_key;
  std::vector<ActionId> actions;
  for (std::uint64_t ep = 1; ep <= config.episodes; ++ep) {
    const double alpha = config.alpha.value(ep);
    const double eps = config.epsilon.value(ep);
    Rng rng(RngStream{config.seed, stream_index(stream_tag::qlearning, ep)});
    s = model.initial_state();
    double t = 0.0;
    std::uint64_t steps = 0;
    Advance adv = advance_to_choice(model, s, t, bound, e, rng, config.step_cap, config.monitor);
    if (!adv.reached) continue;
    double carried = adv.reward;
    steps += adv.steps;
    while (true) {
      obs.project(s, key);
      actions.assign(e.actions.begin(), e.actions.end());
      std::size_t choice;
      if (rng.uniform() < eps) {
        choice = uniform_choose(actions.size(), rng);
      } else {
        choice = greedy_choose(q, key, actions, config.direction);
      }
      double r = carried + model.take(s, e, choice, sample_branch(e.branches(choice), rng));
      carried = 0.0;
      ++steps;
      if (config.monitor) config.monitor->check(s);
      adv = advance_to_choice(model, s, t, bound, e, rng, config.step_cap, config.monitor);
      r += adv.reward;
      steps += adv.steps;
      double bootstrap = 0.0;
      if (adv.reached) {
        obs.project(s, next_key);
        bootstrap = best_value(q, next_key, e.actions, config.direction);
      }
      double& entry = q.at(key, actions[choice]);
      entry = (1.0 - alpha) * entry + alpha * (r + config.gamma * bootstrap);
      if (q.estimated_bytes() > config.memory_cap_bytes)
        throw ResourceError("Q-table exceeds the memory cap: " + std::to_string(q.rows()) + " observations, " +
                            std::to_string(q.entries()) + " entries");
      if (!adv.reached) break;
      if (steps > config.step_cap) throw SimulationError("step cap of " + std::to_string(config.step_cap) + " exceeded");
    }
  }
  return q;
}

}  // namespace masched
