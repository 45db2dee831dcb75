#include "masched/error.hpp"
#include "masched/rng.hpp"
#include "masched/types.hpp"

#include <sstream>

namespace masched {

namespace {

std::string format_diagnostics(const std::vector<Diagnostic>& ds) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (i) out << '\n';
    out << ds[i].line << ':' << ds[i].column << ": " << ds[i].message;
  }
  return out.str();
}

}  // namespace

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : ModelError(format_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::string_view to_string(Direction d) { return d == Direction::Max ? "max" : "min"; }

Direction parse_direction(std::string_view text) {
  if (text == "max") return Direction::Max;
  if (text == "min") return Direction::Min;
  throw ModelError("unknown direction '" + std::string(text) + "'");
}

std::size_t hash_values(std::span<const Value> values) noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL ^ values.size();
  for (Value v : values) h = mix64(h ^ static_cast<std::uint32_t>(v));
  return static_cast<std::size_t>(h);
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t stream_index(std::uint64_t tag, std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(mix64(tag) + a) + b);
}

Rng::Rng(RngStream s) noexcept : origin_(s), key_(mix64(s.seed ^ mix64(s.stream + 0x632be59bd9b4e019ULL))) {}

std::size_t Rng::below(std::size_t k) noexcept {
  if (k <= 1) return 0;
  const auto range = static_cast<std::uint64_t>(k);
  const std::uint64_t threshold = (0 - range) % range;
  while (true) {
    const unsigned __int128 m = static_cast<unsigned __int128>(next()) * range;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::size_t>(m >> 64);
  }
}

}  // namespace masched
