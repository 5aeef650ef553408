#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace knudsen {

// Counter-based stream generator. Every draw is a pure function of
// (seed, stream, counter), so a particle's randomness replays bit-for-bit
// from a stored counter regardless of scheduling or worker count.
//
// The mixer is the SplitMix64 finalizer; distinct streams get distinct keys
// through a double application, which keeps neighbouring stream ids
// statistically unrelated.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed) ^ mix(stream + 0x6A09E667F3BCC909ULL))) {}

  std::uint64_t next_u64() { return mix(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL); }

  // Uniform on the open interval (0, 1); never returns 0, safe under log().
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes exactly two draws.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t position() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream-id namespaces. Initial sampling and boundary events draw from
// disjoint streams so that two ensembles with the same seed share their
// boundary randomness per particle index even when the initial data differ
// (this is what makes coupled contraction runs possible).
inline std::uint64_t evolution_stream(std::uint64_t particle) { return particle; }
inline std::uint64_t init_stream(std::uint64_t particle) {
  return particle | (1ULL << 63);
}

}  // namespace knudsen
