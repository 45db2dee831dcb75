#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace masched {

using Value = std::int32_t;
using ActionId = std::uint32_t;

// A full valuation of the model's state variables. Identity is value equality.
struct State {
  std::vector<Value> values;

  friend bool operator==(const State&, const State&) = default;
  friend auto operator<=>(const State&, const State&) = default;
};

// Projection of a state onto the observable variables, in declaration order.
struct Observation {
  std::vector<Value> values;

  friend bool operator==(const Observation&, const Observation&) = default;
  friend auto operator<=>(const Observation&, const Observation&) = default;
};

enum class Direction { Max, Min };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);

// True if `candidate` is strictly better than `incumbent` for direction `d`.
inline bool better(Direction d, double candidate, double incumbent) {
  return d == Direction::Max ? candidate > incumbent : candidate < incumbent;
}

// Time-bounded expected accumulated reward query: Xmax/Xmin[T == bound](S(reward)).
struct Query {
  Direction direction = Direction::Max;
  double bound = 0.0;
  std::string reward;
};

std::size_t hash_values(std::span<const Value> values) noexcept;

}  // namespace masched

template <>
struct std::hash<masched::State> {
  std::size_t operator()(const masched::State& s) const noexcept { return masched::hash_values(s.values); }
};

template <>
struct std::hash<masched::Observation> {
  std::size_t operator()(const masched::Observation& o) const noexcept { return masched::hash_values(o.values); }
};
