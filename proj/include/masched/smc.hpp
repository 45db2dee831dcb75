#pragma once

#include "masched/model.hpp"
#include "masched/policy.hpp"
#include "masched/sim.hpp"

#include <cstdint>
#include <vector>

namespace masched {

struct SmcConfig {
  double rel_halfwidth = 0.01;
  double confidence = 0.95;
  std::uint64_t n_min = 500;
  std::uint64_t batch = 250;
  std::uint64_t n_max = 100'000'000;
  // > 0: also stop once the half-width drops below this absolute value.
  double abs_halfwidth = 0.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  RunOptions run;  // step cap and monitor; the sink field is ignored
  // Optional, one per worker: receives that worker's decisions.
  std::vector<DecisionSink*> sinks;
};

struct Estimate {
  double mean = 0.0;
  double halfwidth = 0.0;
  double confidence = 0.0;
  double variance = 0.0;
  std::uint64_t n = 0;
  bool converged = false;
};

// z such that P(|N(0,1)| <= z) = confidence.
double normal_quantile_two_sided(double confidence);

// Sequential CLT estimation: batches of runs until h = z*s/sqrt(n) <= rel*|mean|
// (and n >= n_min). Run i always uses stream (seed, stream_index(smc, i)) and results
// are folded in run order, so the estimate does not depend on the worker count.
Estimate estimate(const Model& model, const ObservationMap& obs, const Policy& policy, double bound,
                  const SmcConfig& config);

// True iff the two confidence intervals are disjoint.
bool compare_nonoverlap(const Estimate& a, const Estimate& b) noexcept;

}  // namespace masched
