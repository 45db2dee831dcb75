#include "masched/sim.hpp"

#include "masched/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace masched {

std::pair<double, std::size_t> sample_markovian(std::span<const double> rates, Rng& rng) {
  double total = 0.0;
  for (double r : rates) total += r;
  const double sojourn = -std::log(rng.uniform_open_closed()) / total;
  if (rates.size() == 1) return {sojourn, 0};
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i + 1 < rates.size(); ++i) {
    if (u < rates[i]) return {sojourn, i};
    u -= rates[i];
  }
  return {sojourn, rates.size() - 1};
}

std::size_t sample_branch(std::span<const double> probabilities, Rng& rng) {
  if (probabilities.size() == 1) return 0;
  double u = rng.uniform();
  std::size_t last = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    if (u < probabilities[i]) return i;
    u -= probabilities[i];
    last = i;
  }
  return last;
}

RunResult Simulator::run(const Policy& policy, double bound, Rng& rng, const RunOptions& opts) {
  state_ = model_.initial_state();
  RunResult res;
  double t = 0.0;
  // Rate reward accrues per stretch of constant rate.
  double seg_rate = 0.0, seg_start = 0.0;
  if (opts.monitor) opts.monitor->check(state_);
  while (t <= bound) {
    model_.enabled(state_, enabled_);
    if (enabled_.deadlock()) throw SimulationError("deadlock at t=" + std::to_string(t));
    if (enabled_.probabilistic()) {
      std::size_t choice = 0;
      if (enabled_.choice_count() > 1) {
        obs_.project(state_, obs_buf_);
        choice = policy.choose(obs_buf_, enabled_, rng);
        if (opts.sink) opts.sink->record(obs_buf_, enabled_.actions[choice]);
      }
      const std::size_t branch = sample_branch(enabled_.branches(choice), rng);
      res.reward += model_.take(state_, enabled_, choice, branch);
      ++res.steps;
    } else {
      const auto [sojourn, which] = sample_markovian(enabled_.rates, rng);
      const double rr = model_.rate_reward(state_);
      if (rr != seg_rate) {
        res.reward += seg_rate * (t - seg_start);
        seg_rate = rr;
        seg_start = t;
      }
      if (t + sojourn <= bound) {
        res.reward += model_.take(state_, enabled_, which, 0);
        ++res.steps;
      }
      t += sojourn;
    }
    if (opts.monitor) opts.monitor->check(state_);
    if (res.steps > opts.step_cap)
      throw SimulationError("step cap of " + std::to_string(opts.step_cap) + " exceeded at t=" + std::to_string(t));
  }
  res.reward += seg_rate * (std::min(t, bound) - seg_start);
  res.end_time = t;
  return res;
}

RunResult run(const Model& model, const ObservationMap& obs, const Policy& policy, double bound, Rng& rng,
              const RunOptions& opts) {
  Simulator sim(model, obs);
  return sim.run(policy, bound, rng, opts);
}

}  // namespace masched
