#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

#include "shapeaug/hash.hpp"

namespace shapeaug {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** generator with distribution helpers whose output depends only on
/// the seed. The standard library distributions are implementation-defined, so
/// every draw used by the augmentation pipeline goes through this class.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi); returns lo when lo == hi.
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());  // full 64-bit range
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = max() - max() % span;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  // Exact binomial draw by summing Bernoulli trials; counts in event histograms are small.
  std::uint64_t binomial(std::uint64_t n, double p) noexcept {
    if (p >= 1.0) return n;
    if (p <= 0.0) return 0;
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

/// Identifies the random stream of one sample in a corpus. Every stage of the
/// pipeline derives its own sub-stream from (master, sample_index, stage label),
/// so results do not depend on worker count or on which other stages are enabled.
struct RngSeed {
  std::uint64_t master = 0;
  std::uint64_t sample_index = 0;

  std::uint64_t derive(std::string_view label) const noexcept {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s = a ^ sample_index;
    std::uint64_t b = splitmix64(s);
    s = b ^ fnv1a64(label);
    return splitmix64(s);
  }

  Rng stream(std::string_view label) const noexcept { return Rng(derive(label)); }
};

}  // namespace shapeaug
