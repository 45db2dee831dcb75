#include "masched/smart_sampling.hpp"

#include "masched/error.hpp"
#include "masched/parallel.hpp"
#include "masched/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace masched {

namespace {

struct Candidate {
  std::uint32_t sigma;
  std::uint32_t slot;  // position in the sampled list; keys the random streams
  double mean = 0.0;
  bool failed = false;
  std::string error;
};

}  // namespace

SmartSamplingResult run_smart_sampling(const Model& model, const ObservationMap& obs, double bound,
                                       const SmartSamplingConfig& config) {
  if (config.strategies < 1 || config.strategies > config.budget)
    throw std::invalid_argument("smart sampling needs 1 <= N <= K");
  if (config.strategies > UINT32_MAX) throw std::invalid_argument("too many strategies");

  SmartSamplingResult result;
  Rng sigma_rng(RngStream{config.seed, stream_index(stream_tag::lss_sigma, 0)});
  std::vector<Candidate> alive;
  for (std::uint32_t i = 0; i < config.strategies; ++i) {
    const auto sigma = static_cast<std::uint32_t>(sigma_rng.next() >> 32);
    result.sampled.push_back(sigma);
    alive.push_back(Candidate{sigma, i, 0.0, false, {}});
  }

  const unsigned workers = std::max(1u, config.workers);
  std::vector<std::unique_ptr<Simulator>> sims;
  for (unsigned w = 0; w < workers; ++w) sims.push_back(std::make_unique<Simulator>(model, obs));

  std::uint32_t round = 0;
  while (alive.size() > 1) {
    ++round;
    const std::uint64_t per = (config.budget + alive.size() - 1) / alive.size();
    std::vector<LssPolicy> policies;
    for (const auto& c : alive) policies.emplace_back(c.sigma);
    std::vector<double> rewards(alive.size() * per, 0.0);
    std::vector<std::string> errors(alive.size());
    std::vector<std::uint64_t> first_failure(alive.size(), UINT64_MAX);
    std::mutex failure_mutex;

    parallel_for(rewards.size(), workers, [&](unsigned w, std::size_t i) {
      const std::size_t c = i / per;
      const std::uint64_t run = i % per;
      Rng rng(RngStream{config.seed, stream_index(stream_tag::lss_round, round,
                                                  (static_cast<std::uint64_t>(alive[c].slot) << 32) | run)});
      auto fail = [&](const char* what) {
        std::lock_guard lock(failure_mutex);
        if (run < first_failure[c]) {
          first_failure[c] = run;
          errors[c] = what;
        }
      };
      try {
        rewards[i] = sims[w]->run(policies[c], bound, rng, config.run).reward;
      } catch (const SimulationError& e) {
        fail(e.what());
      } catch (const ConsistencyError& e) {
        fail(e.what());
      }
    });
    result.total_runs += rewards.size();

    for (std::size_t c = 0; c < alive.size(); ++c) {
      auto& cand = alive[c];
      cand.failed = first_failure[c] != UINT64_MAX;
      cand.error = errors[c];
      cand.mean = std::accumulate(rewards.begin() + c * per, rewards.begin() + (c + 1) * per, 0.0) / static_cast<double>(per);
      result.log.push_back(RoundEntry{round, cand.sigma, per, cand.failed ? 0.0 : cand.mean, cand.failed, cand.error});
    }

    std::stable_sort(alive.begin(), alive.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.failed != b.failed) return !a.failed;
      if (!a.failed && a.mean != b.mean) return better(config.direction, a.mean, b.mean);
      if (a.sigma != b.sigma) return a.sigma < b.sigma;
      return a.slot < b.slot;
    });
    if (alive.front().failed)
      throw SimulationError("every strategy failed in round " + std::to_string(round) + "; sigma " +
                            std::to_string(alive.front().sigma) + ": " + alive.front().error);
    alive.resize((alive.size() + 1) / 2);
  }
  result.sigma = alive.front().sigma;
  result.rounds = round;
  return result;
}

void write_round_log(std::ostream& out, const SmartSamplingResult& result) {
  out << "round,sigma,runs,mean\n";
  char buf[32];
  for (const auto& e : result.log) {
    std::snprintf(buf, sizeof buf, "%.17g", e.failed ? std::nan("") : e.mean);
    out << e.round << ',' << e.sigma << ',' << e.runs << ',' << buf << '\n';
  }
}

}  // namespace masched
