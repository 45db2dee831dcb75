#include "masched/policy.hpp"

#include "masched/error.hpp"

#include <algorithm>

namespace masched {

namespace {

constexpr std::uint32_t kFnvBasis = 2166136261u;
constexpr std::uint32_t kFnvPrime = 16777619u;

inline std::uint32_t fnv_word(std::uint32_t h, std::uint32_t w) noexcept {
  for (int i = 0; i < 4; ++i) {
    h ^= (w >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint32_t fmix32(std::uint32_t h) noexcept {
  h ^= h >> 16;
  h *= 0x85ebca6bu;
  h ^= h >> 13;
  h *= 0xc2b2ae35u;
  h ^= h >> 16;
  return h;
}

}  // namespace

std::uint32_t lss_hash(std::uint32_t sigma, std::span<const Value> obs) noexcept {
  std::uint32_t h = fnv_word(kFnvBasis, sigma);
  for (Value v : obs) h = fnv_word(h, static_cast<std::uint32_t>(v));
  return fmix32(h);
}

std::size_t table_choose(const StrategyTable& table, std::span<const Value> obs, std::span<const ActionId> actions,
                         Rng& rng, std::atomic<std::uint64_t>* misses) {
  const ActionId* stored = table.find(obs);
  if (!stored) {
    if (misses) misses->fetch_add(1, std::memory_order_relaxed);
    return uniform_choose(actions.size(), rng);
  }
  auto it = std::find(actions.begin(), actions.end(), *stored);
  if (it == actions.end())
    throw ConsistencyError("strategy action '" + table.actions().at(*stored) + "' for observation " +
                           format_observation(obs) + " is not enabled");
  return static_cast<std::size_t>(it - actions.begin());
}

TablePolicy::TablePolicy(const StrategyTable& table, const Model& model, const ObservationMap& obs)
    : table_(table), model_(model) {
  if (table.variables() != obs.names())
    throw ModelError("strategy table variables do not match the model's observation variables");
  const auto& labels = model.actions();
  for (const auto& a : table.actions()) {
    auto it = std::find(labels.begin(), labels.end(), a);
    if (it == labels.end()) throw ModelError("strategy table action '" + a + "' is not an action of the model");
    to_model_.push_back(static_cast<ActionId>(it - labels.begin()));
  }
}

std::size_t TablePolicy::choose(std::span<const Value> obs, const Enabled& e, Rng& rng) const {
  const ActionId* stored = table_.find(obs);
  if (!stored) {
    misses_.fetch_add(1, std::memory_order_relaxed);
    return uniform_choose(e.choice_count(), rng);
  }
  const ActionId want = to_model_[*stored];
  auto it = std::find(e.actions.begin(), e.actions.end(), want);
  if (it == e.actions.end())
    throw ConsistencyError("strategy action '" + model_.actions()[want] + "' for observation " + format_observation(obs) +
                           " is not enabled");
  return static_cast<std::size_t>(it - e.actions.begin());
}

}  // namespace masched
