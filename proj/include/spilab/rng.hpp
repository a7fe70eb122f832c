// Seeded random number generation with portable draw semantics.
//
// Streams must be reproducible across platforms and standard libraries, so
// engines are either std::mt19937_64 (long single streams) or SplitMix64
// (cheap per-item streams), and the mappings from raw bits to uniforms and
// categorical draws are fixed here rather than taken from <random>
// distributions. Parallel sampling kernels derive one independent stream per
// work item from (seed, item index) so that results do not depend on thread
// count or execution mode.

#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace spilab {

/// Mixes a base seed with a stream index into a fresh seed (SplitMix64
/// finalizer). Distinct (seed, index) pairs give well-separated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64: constant-time construction, one multiply-xor round per draw.
/// Used for the many short per-item streams of the sampling kernels.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ULL; }
  std::uint64_t operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Deterministic pseudo-random stream over a given engine.
template <class Engine>
class BasicRng {
 public:
  explicit BasicRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform draw in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) {
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

  /// Index drawn from a probability vector by walking its running sum.
  /// Falls back to the last index with positive mass if rounding leaves the
  /// draw past the total.
  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    int last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0) last_positive = static_cast<int>(i);
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return last_positive;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  Engine engine_;
};

/// Heavyweight engine for long single streams (environment construction,
/// long chain simulations).
using Rng = BasicRng<std::mt19937_64>;

/// Cheap engine for per-item streams in parallel kernels.
using SplitRng = BasicRng<SplitMix64>;

}  // namespace spilab
