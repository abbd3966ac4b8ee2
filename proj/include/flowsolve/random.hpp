#pragma once

#include <cstdint>

#include "flowsolve/core.hpp"

namespace flowsolve {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// Counter-based normal generator.  Draw i of stream (seed, stream) is a
/// pure function of (seed, stream, i): two 64-bit words are obtained by
/// hashing the counter with SplitMix64, mapped to uniforms in (0, 1) with
/// 53-bit resolution, and turned into one normal by Box-Muller (cosine
/// branch).  Results depend only on IEEE arithmetic and libm log/cos/sqrt.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  double uniform(std::uint64_t counter) const;
  double normal(std::uint64_t counter) const;
  /// Standard-normal vector using counters [offset, offset + dim).
  Vector normal_vector(Eigen::Index dim, std::uint64_t offset = 0) const;

 private:
  std::uint64_t key(std::uint64_t counter, std::uint64_t lane) const;

  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace flowsolve
