#pragma once

#include "masched/model.hpp"
#include "masched/sim.hpp"
#include "masched/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace masched {

struct SmartSamplingConfig {
  std::uint64_t strategies = 1000;  // N
  std::uint64_t budget = 10000;     // K, runs per round
  Direction direction = Direction::Max;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  RunOptions run;  // step cap and monitor
};

struct RoundEntry {
  std::uint32_t round = 0;  // 1-based
  std::uint32_t sigma = 0;
  std::uint64_t runs = 0;
  double mean = 0.0;
  bool failed = false;
  std::string error;
};

struct SmartSamplingResult {
  std::uint32_t sigma = 0;
  std::uint32_t rounds = 0;
  std::uint64_t total_runs = 0;
  std::vector<std::uint32_t> sampled;
  std::vector<RoundEntry> log;
};

// Samples N strategy identifiers and halves the set each round by the mean reward of
// ceil(K/|S|) runs per strategy until one remains. Ties keep the smaller identifier;
// strategies whose runs fail are dropped first. Throws SimulationError if every
// surviving strategy fails in a round.
SmartSamplingResult run_smart_sampling(const Model& model, const ObservationMap& obs, double bound,
                                       const SmartSamplingConfig& config);

// "round,sigma,runs,mean" rows.
void write_round_log(std::ostream& out, const SmartSamplingResult& result);

}  // namespace masched
