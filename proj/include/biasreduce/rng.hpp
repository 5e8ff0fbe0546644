#ifndef BIASREDUCE_RNG_HPP_
#define BIASREDUCE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace biasreduce {

// SplitMix64 finalizer; full-avalanche mix of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based key derivation: fold one lane (chain index, step index, ...)
// into a key. Every consumer of randomness gets a stream keyed by the full
// lane tuple, so any piece of a simulation is reproducible in isolation and
// independent of scheduling.
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t lane) {
  return mix64(key + 0x9e3779b97f4a7c15ULL * (lane + 1));
}

// xoshiro256++ with SplitMix64 seeding and a Box-Muller normal generator.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ULL;
      word = mix64(sm);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Hierarchical stream factory. sub(lane) scopes the key one level deeper;
// stream(lane) hands out an independent generator for that lane. Factories
// are tiny value types and safe to copy across threads.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t master) : key_(mix64(master)) {}

  StreamFactory sub(std::uint64_t lane) const {
    return StreamFactory(derive_key(key_, lane), FromKey{});
  }

  RngStream stream(std::uint64_t lane) const {
    return RngStream(derive_key(key_, lane));
  }

  RngStream stream(std::uint64_t a, std::uint64_t b) const {
    return RngStream(derive_key(derive_key(key_, a), b));
  }

  std::uint64_t key() const { return key_; }

 private:
  struct FromKey {};
  StreamFactory(std::uint64_t key, FromKey) : key_(key) {}

  std::uint64_t key_;
};

}  // namespace biasreduce

#endif  // BIASREDUCE_RNG_HPP_
