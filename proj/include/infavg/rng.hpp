#pragma once

#include <cstdint>

namespace infavg {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator. The n-th draw is mix64(key + n * golden), so a
/// stream is fully described by (key, counter) and is cheap to copy.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng() = default;
  constexpr explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() { return mix64(key_ + (++counter_) * kGolden); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(operator()() >> 11) * 0x1.0p-53; }

  /// Independent child stream, derived from the next draw.
  CounterRng split() { return CounterRng(mix64(operator()() ^ 0xD1B54A32D192ED03ULL)); }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Per-task stream: task id is (experiment, index). Parallel schedules
/// therefore cannot change results.
constexpr CounterRng task_stream(std::uint64_t master_seed, std::uint64_t experiment,
                                 std::uint64_t index) {
  const std::uint64_t k = mix64(mix64(master_seed + 0x632BE59BD9B4E019ULL) ^ mix64(experiment));
  return CounterRng(mix64(k + index * 0xA0761D6478BD642FULL));
}

}  // namespace infavg
