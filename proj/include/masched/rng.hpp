#pragma once

#include <cstddef>
#include <cstdint>

namespace masched {

std::uint64_t mix64(std::uint64_t x) noexcept;

// Identifies one reproducible random stream: same (seed, stream) => same draws.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// Builds a stream index from a purpose tag and up to two counters (round, run, ...).
std::uint64_t stream_index(std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0) noexcept;

// Stream tags used by the engines; distinct so that different phases never share draws.
namespace stream_tag {
inline constexpr std::uint64_t smc = 0x534d43;
inline constexpr std::uint64_t lss_sigma = 0x4c5353;
inline constexpr std::uint64_t lss_round = 0x4c5352;
inline constexpr std::uint64_t qlearning = 0x514c;
inline constexpr std::uint64_t test = 0x54455354;
}  // namespace stream_tag

// SplitMix64 in counter mode: draw i is mix64(key + i * golden_gamma), key derived
// from (seed, stream). No shared state, so any run can be replayed in isolation.
class Rng {
 public:
  explicit Rng(RngStream s) noexcept;

  std::uint64_t next() noexcept {
    counter_ += kGamma;
    return mix64(key_ + counter_);
  }

  // Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe argument for log().
  double uniform_open_closed() noexcept { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  // Uniform integer in [0, k), k >= 1 (Lemire's multiply-shift with rejection).
  std::size_t below(std::size_t k) noexcept;

  RngStream stream() const noexcept { return origin_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  RngStream origin_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace masched
