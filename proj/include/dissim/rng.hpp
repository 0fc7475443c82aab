#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dissim {

/// Counter-style random stream built on the SplitMix64 generator. A stream is
/// identified by the pair (seed, stream index), so independent substreams for
/// paired simulations are cheap to mint and never overlap state by
/// construction. Replays with the same identifiers reproduce the draw
/// sequence exactly for a given floating-point library build.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(mix(seed + kGolden) ^ mix(stream + 0x94d049bb133111ebULL))) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform draw in the half-open interval (0, 1]; never zero, so logarithms
  /// of the result stay finite.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via the Box-Muller transform. Consumes exactly two
  /// uniforms per call and caches nothing, keeping the draw count per
  /// simulation step fixed.
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Poisson draw by inversion of the cumulative distribution. Consumes
  /// exactly one uniform per call; exact for the small per-step means the
  /// jump simulator produces.
  int next_poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
      throw std::domain_error("next_poisson: mean must be finite and nonnegative");
    }
    const double u = next_uniform();
    double probability = std::exp(-mean);
    double cumulative = probability;
    int count = 0;
    while (u > cumulative) {
      ++count;
      probability *= mean / count;
      cumulative += probability;
      if (count > 10'000'000) {
        throw std::runtime_error("next_poisson: inversion failed to terminate");
      }
    }
    return count;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace dissim
