#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace binmem {

/// SplitMix64 step; advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Order-sensitive hash of two words, used to derive per-stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_index) noexcept;

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  /// State expanded from a single word through SplitMix64.
  explicit Xoshiro256StarStar(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Independent stream for (seed, stream_index). Streams for distinct indices
/// are seeded from distinct SplitMix64 images and do not depend on how work is
/// scheduled.
Xoshiro256StarStar make_stream(std::uint64_t seed, std::uint64_t stream_index) noexcept;

/// Uniform variate strictly inside (0, 1): (k + 1/2) 2^-53 for a 53-bit k.
double uniform_open01(Xoshiro256StarStar& gen) noexcept;

/// Standard normal CDF via the complementary error function.
double normal_cdf(double x) noexcept;

/// Standard normal quantile, u in (0, 1). Rational approximation refined by
/// one Halley step against normal_cdf; relative error near machine precision.
double normal_quantile(double u);

}  // namespace binmem
