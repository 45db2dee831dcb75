#include "masched/smc.hpp"

#include "masched/error.hpp"
#include "masched/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <memory>
#include <stdexcept>

namespace masched {

double normal_quantile_two_sided(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), (1.0 + confidence) / 2.0);
}

Estimate estimate(const Model& model, const ObservationMap& obs, const Policy& policy, double bound,
                  const SmcConfig& config) {
  if (!(config.rel_halfwidth > 0.0)) throw std::invalid_argument("relative half-width must be positive");
  if (config.batch == 0 || config.n_max == 0) throw std::invalid_argument("batch size and n_max must be positive");
  const double z = normal_quantile_two_sided(config.confidence);
  const unsigned workers = std::max(1u, config.workers);

  std::vector<std::unique_ptr<Simulator>> sims;
  for (unsigned w = 0; w < workers; ++w) sims.push_back(std::make_unique<Simulator>(model, obs));
  std::vector<double> rewards;

  Estimate est;
  est.confidence = config.confidence;
  double mean = 0.0, m2 = 0.0;
  std::uint64_t n = 0;
  while (n < config.n_max) {
    const std::uint64_t count = std::min(config.batch, config.n_max - n);
    rewards.assign(count, 0.0);
    const std::uint64_t first = n;
    parallel_for(count, workers, [&](unsigned w, std::size_t i) {
      Rng rng(RngStream{config.seed, stream_index(stream_tag::smc, first + i)});
      RunOptions opts = config.run;
      opts.sink = w < config.sinks.size() ? config.sinks[w] : nullptr;
      rewards[i] = sims[w]->run(policy, bound, rng, opts).reward;
    });
    for (double r : rewards) {
      ++n;
      const double d = r - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (r - mean);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    est.mean = mean;
    est.variance = var;
    est.n = n;
    est.halfwidth = z * std::sqrt(var / static_cast<double>(n));
    if (n < config.n_min) continue;
    if (est.halfwidth <= config.rel_halfwidth * std::abs(mean) ||
        (config.abs_halfwidth > 0.0 && est.halfwidth <= config.abs_halfwidth)) {
      est.converged = true;
      return est;
    }
  }
  if (mean == 0.0 && est.variance > 0.0)
    throw SimulationError("relative criterion unreachable: mean is 0 after " + std::to_string(n) + " runs");
  return est;
}

bool compare_nonoverlap(const Estimate& a, const Estimate& b) noexcept {
  return a.mean + a.halfwidth < b.mean - b.halfwidth || b.mean + b.halfwidth < a.mean - a.halfwidth;
}

}  // namespace masched
