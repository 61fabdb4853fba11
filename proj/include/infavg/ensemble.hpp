#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "infavg/errors.hpp"
#include "infavg/parallel.hpp"

namespace infavg {

/// Experiment ids that key the per-task random streams.
enum ExperimentId : std::uint64_t {
  kStreamGreenKubo = 0x6B01,
  kStreamSigma = 0x5161,
  kStreamBrownian = 0xB001,
  kStreamTimeChange = 0xB002,
  kStreamLimitY = 0xB003,
  kStreamToyOrbits = 0x7001,
  kStreamBilliard = 0xB111,
  kStreamBootstrap = 0xB007,
  kStreamDubinsSchwarz = 0xD500,
};

/// Calls fn() until it returns without a GrazingCollision. fn must draw a
/// fresh initial condition on each call, from a stream it owns.
template <class Fn>
auto retry_grazing(Fn&& fn, int max_attempts = 64, std::int64_t* discarded = nullptr) -> decltype(fn()) {
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const GrazingCollision&) {
      if (discarded) ++*discarded;
      if (attempt >= max_attempts) throw;
    }
  }
}

/// Fixed shards of `shard` consecutive tasks. Shard partials are combined in
/// shard order, so the result does not depend on the schedule.
struct ShardPlan {
  std::size_t n = 0;
  std::size_t shard = 1024;
  std::size_t count() const { return (n + shard - 1) / shard; }
  std::size_t begin(std::size_t s) const { return s * shard; }
  std::size_t end(std::size_t s) const { return std::min(n, (s + 1) * shard); }
};

}  // namespace infavg
