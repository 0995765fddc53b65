#pragma once

#include <cstdint>

#include "bergcov/linalg.hpp"

namespace bergcov {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent key for substream `stream` of `seed`.
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream);

/// Counter-based generator: the k-th draw is a pure function of (key, k), so a
/// stream can be split into blocks evaluated in any order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (consumes two draws).
  double normal();
  std::size_t index(std::size_t bound) { return static_cast<std::size_t>(uniform() * static_cast<double>(bound)); }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Uniform point of the open unit ball in C^n by rejection from the cube [-1,1]^{2n}.
Vec sample_ball_uniform(CounterRng& rng, int n);

/// Uniform point of the unit sphere in C^n.
Vec sample_sphere(CounterRng& rng, int n);

/// Uniform ball point whose radius is replaced by radius^{1/4}, pushing mass
/// toward the boundary sphere.
Vec sample_ball_boundary_biased(CounterRng& rng, int n);

/// Uniform ball point resampled until |⟨z, root⟩| ≥ min_distance for every root.
Vec sample_ball_off_hyperplanes(CounterRng& rng, int n, const std::vector<Vec>& roots,
                                double min_distance = 1e-3);

}  // namespace bergcov
