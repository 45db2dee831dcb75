#pragma once

#include "masched/model.hpp"
#include "masched/qtable.hpp"
#include "masched/rng.hpp"
#include "masched/strategy_table.hpp"

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace masched {

// FNV-1a over the little-endian bytes of sigma followed by each observation value
// (4-byte two's complement), then the murmur3 32-bit finaliser.
std::uint32_t lss_hash(std::uint32_t sigma, std::span<const Value> obs) noexcept;

// H(sigma . obs) mod k, 0-based; k >= 1.
inline std::size_t lss_choose(std::uint32_t sigma, std::span<const Value> obs, std::size_t k) noexcept {
  return k <= 1 ? 0 : lss_hash(sigma, obs) % k;
}

inline std::size_t uniform_choose(std::size_t k, Rng& rng) noexcept { return k <= 1 ? 0 : rng.below(k); }

// Resolves the nondeterminism among the probabilistic transitions of one state.
// Implementations are immutable and shared across worker threads.
class Policy {
 public:
  virtual ~Policy() = default;
  // Index in [0, e.choice_count()); only called when there are at least two choices.
  virtual std::size_t choose(std::span<const Value> obs, const Enabled& e, Rng& rng) const = 0;
  virtual std::string name() const = 0;
};

class UniformPolicy final : public Policy {
 public:
  std::size_t choose(std::span<const Value>, const Enabled& e, Rng& rng) const override {
    return uniform_choose(e.choice_count(), rng);
  }
  std::string name() const override { return "uniform"; }
};

class LssPolicy final : public Policy {
 public:
  explicit LssPolicy(std::uint32_t sigma) : sigma_(sigma) {}
  std::size_t choose(std::span<const Value> obs, const Enabled& e, Rng&) const override {
    return lss_choose(sigma_, obs, e.choice_count());
  }
  std::string name() const override { return "lss"; }
  std::uint32_t sigma() const noexcept { return sigma_; }

 private:
  std::uint32_t sigma_;
};

class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(const QTable& q) : q_(q) {}
  std::size_t choose(std::span<const Value> obs, const Enabled& e, Rng&) const override {
    return greedy_choose(q_, obs, e.actions, q_.meta().direction);
  }
  std::string name() const override { return "qlearn"; }

 private:
  const QTable& q_;
};

// Table lookup; misses fall back to a uniform choice and are counted. The table's
// action names are mapped onto the model's labels at construction.
class TablePolicy final : public Policy {
 public:
  TablePolicy(const StrategyTable& table, const Model& model, const ObservationMap& obs);

  std::size_t choose(std::span<const Value> obs, const Enabled& e, Rng& rng) const override;
  std::string name() const override { return "replay"; }

  std::uint64_t misses() const noexcept { return misses_.load(std::memory_order_relaxed); }

 private:
  const StrategyTable& table_;
  const Model& model_;
  std::vector<ActionId> to_model_;
  mutable std::atomic<std::uint64_t> misses_{0};
};

// Index of `stored` among `actions`; ConsistencyError if it is not enabled.
std::size_t table_choose(const StrategyTable& table, std::span<const Value> obs, std::span<const ActionId> actions,
                         Rng& rng, std::atomic<std::uint64_t>* misses = nullptr);

}  // namespace masched
