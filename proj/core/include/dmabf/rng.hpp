#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace dmabf {

/// Counter-based generator: the n-th output is the SplitMix64 finalizer
/// applied to key + n * golden gamma. Streams for independent work items are
/// derived from (seed, stream id), so results do not depend on which thread
/// draws them. Distributions are implemented here rather than through
/// <random> so sequences are identical across standard libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0) : key_(mix(seed)) {}

  static CounterRng stream(std::uint64_t seed, std::uint64_t stream_id) {
    CounterRng rng;
    rng.key_ = mix(mix(seed) ^ (stream_id * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL));
    return rng;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (counter_++) * kGamma); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (lo, hi).
  double uniform(double lo, double hi) {
    double u = 0.0;
    do {
      u = uniform();
    } while (u == 0.0);
    return lo + (hi - lo) * u;
  }

  /// Standard normal via Box-Muller (one value per call; the partner is
  /// discarded so the stream position stays simple).
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 == 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Circularly-symmetric complex normal with unit variance.
  std::complex<double> complex_normal() {
    const double s = std::sqrt(0.5);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace dmabf
