#include "lcwnet/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lcw {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
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

double Rng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("uniform: requires lo < hi");
  return lo + (hi - lo) * next_unit();
}

double Rng::normal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("normal: requires sigma > 0");
  if (has_spare_) {
    has_spare_ = false;
    return mu + sigma * spare_;
  }
  // u1 in (0, 1] keeps the log argument positive.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return mu + sigma * r * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("below: requires n > 0");
  const std::uint64_t threshold = (0ULL - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

Matrix rand_uniform(Rng& rng, double lo, double hi, std::size_t rows, std::size_t cols) {
  if (!(lo < hi)) throw std::invalid_argument("rand_uniform: requires lo < hi");
  Matrix m(rows, cols);
  for (double& v : m.data()) v = lo + (hi - lo) * rng.next_unit();
  return m;
}

Matrix rand_normal(Rng& rng, double mu, double sigma, std::size_t rows, std::size_t cols) {
  if (!(sigma > 0.0)) throw std::invalid_argument("rand_normal: requires sigma > 0");
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal(mu, sigma);
  return m;
}

}  // namespace lcw
