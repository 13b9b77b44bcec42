#pragma once

// Deterministic 64-bit generator (xoshiro256++, splitmix64-seeded) so that
// corpora and training runs replay identically on every platform.

#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "factorml/numtheory.hpp"

namespace factorml {

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t state = base ^ (0x9E3779B97F4A7C15ull * (2 * a + b + 1));
  return detail::splitmix64(state);
}

class Prng {
 public:
  explicit Prng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  /// Unbiased draw from [lo, hi], both ends inclusive.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    const std::uint64_t range = hi - lo;
    if (range == std::numeric_limits<std::uint64_t>::max()) return next_u64();
    const std::uint64_t m = range + 1;
    const std::uint64_t reject_below = (0 - m) % m;  // 2^64 mod m
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x < reject_below);
    return lo + x % m;
  }

  /// Unbiased big-integer draw from [lo, hi] via bit-width rejection.
  BigInt uniform_int(const BigInt& lo, const BigInt& hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    const BigInt range = hi - lo;
    if (range == 0) return lo;
    const int bits = bit_length(range);
    BigInt value;
    do {
      value = 0;
      for (int got = 0; got < bits; got += 64) {
        value <<= 64;
        value |= next_u64();
      }
      value >>= (((bits + 63) / 64) * 64 - bits);  // keep exactly `bits` bits
    } while (value > range);
    return lo + value;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(std::uint64_t{0}, std::uint64_t{i}));
      using std::swap;
      swap(items[i], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
};

}  // namespace factorml
