#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pinning {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Deterministic child seed for stream `index` of `seed`. Used to give each
/// disorder replica (or sampler) its own independent stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

/**
 * Counter-based generator: the k-th draw is a pure function of (key, k).
 *
 * Any position of the stream can be reached in O(1), so a disorder field of
 * length N can be produced by any number of threads and still be
 * bit-identical to the serial result.
 */
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr std::uint64_t at(std::uint64_t key, std::uint64_t counter) noexcept {
    return mix64(key + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  static double uniform_at(std::uint64_t key, std::uint64_t counter) noexcept {
    return static_cast<double>(at(key, counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() noexcept { return at(key_, counter_++); }

  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as an argument of log.
  double uniform_pos() noexcept { return 1.0 - uniform(); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace pinning
