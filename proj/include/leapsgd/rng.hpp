#pragma once

#include <cmath>
#include <cstdint>

namespace leapsgd {

// Counter-based splittable generator. State is (key, counter); each draw
// hashes key + counter with the SplitMix64 finalizer, so streams derived via
// split() are independent of call order and scheduling — parallel sweep
// cells stay reproducible regardless of worker count.
class Rng {
public:
  explicit Rng(uint64_t seed) : key_(mix(seed ^ kKeySalt)) {}

  // Derive an independent stream; does not advance this generator.
  Rng split(uint64_t stream) const {
    return Rng(FromKey{}, mix(key_ ^ mix(stream + kStreamSalt)));
  }

  uint64_t next_u64() { return mix(key_ + kGolden * ++ctr_); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes two draws, keeps no cache.
  double normal() {
    double u = uniform(), v = uniform();
    // Guard u = 0 (log singularity).
    u = u > 0 ? u : 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
  }

  // Uniform on {-1, +1}.
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  // Uniform integer in [0, n).
  uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

private:
  struct FromKey {};
  Rng(FromKey, uint64_t key) : key_(key) {}

  static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;
  static constexpr uint64_t kKeySalt = 0x8f2d3a9c51e6b47dull;
  static constexpr uint64_t kStreamSalt = 0xd1342543de82ef95ull;

  // SplitMix64 finalizer.
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  uint64_t key_;
  uint64_t ctr_ = 0;
};

}  // namespace leapsgd
