#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace excut {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over a short tag; used to namespace derived seeds by command name.
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed derivation scheme shared by every randomized job:
///   seed(master, tag, job, trial) = mix(mix(mix(master ^ hash(tag)) + job) + trial)
/// Distinct (tag, job, trial) triples give statistically independent streams,
/// so trials can be run in any order or in parallel with identical results.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t job = 0,
                                    std::uint64_t trial = 0) noexcept {
  return mix64(mix64(mix64(master ^ tag_hash(tag)) + job) + trial);
}

/// Counter-based 64-bit generator (SplitMix64). Output i is mix64(seed + (i+1)*gamma).
/// Satisfies std::uniform_random_bit_generator.
class Rng {
  __extension__ using u128 = unsigned __int128;

 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Seed this stream was created with.
  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on the open interval (lo, hi).
  double uniform_open(double lo, double hi) noexcept {
    for (;;) {
      const double v = lo + (hi - lo) * uniform_open();
      if (v > lo && v < hi) return v;
    }
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = (*this)();
    u128 m = static_cast<u128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<u128>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Exponential variate with the given rate (mean 1/rate).
  double exponential(double rate) noexcept { return -std::log(uniform_open()) / rate; }

  /// Standard normal variate (Box-Muller, one output per call).
  double normal() noexcept {
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(uniform_open())) * std::cos(two_pi * uniform_open());
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace excut
