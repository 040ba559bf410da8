#pragma once

#include <cstdint>

#include "lcwnet/matrix.hpp"

namespace lcw {

/// Seedable PRNG with a fixed algorithm so that a seed reproduces the same
/// stream on every platform. Never backed by the platform's default engine.
///
/// State initialization (splitmix64 applied four times to the seed):
///   z = (x += 0x9E3779B97F4A7C15)
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   out = z ^ (z >> 31)
///
/// Generator update (xoshiro256++):
///   result = rotl(s0 + s3, 23) + s0
///   t = s1 << 17
///   s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t
///   s3 = rotl(s3, 45)
///
/// Uniform doubles take the top 53 bits of the integer stream, so they are
/// bit-identical everywhere. Normal draws use the Box-Muller transform and
/// inherit the precision of the host libm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Next raw 64-bit word of the stream.
  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double next_unit();

  /// Uniform in [lo, hi); requires lo < hi.
  double uniform(double lo, double hi);

  /// Normal with mean mu and standard deviation sigma; requires sigma > 0.
  double normal(double mu, double sigma);

  /// Integer in [0, n), n > 0. Uses rejection to avoid modulo bias.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_[4] = {0, 0, 0, 0};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// rows x cols of i.i.d. uniform(lo, hi) samples, row-major draw order.
Matrix rand_uniform(Rng& rng, double lo, double hi, std::size_t rows, std::size_t cols);

/// rows x cols of i.i.d. normal(mu, sigma) samples, row-major draw order.
Matrix rand_normal(Rng& rng, double mu, double sigma, std::size_t rows, std::size_t cols);

}  // namespace lcw
