#include "negograph/rng.hpp"

#include <cmath>
#include <numbers>

namespace negograph::nd {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

void Xoshiro256::reseed(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Xoshiro256::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Lemire-free rejection; n is always small here.
  const std::uint64_t limit = max() - (max() % n);
  std::uint64_t x = (*this)();
  while (x >= limit) x = (*this)();
  return x % n;
}

Xoshiro256 make_stream(std::uint64_t seed, Stream stream) {
  std::uint64_t mix = seed ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL);
  return Xoshiro256(splitmix64(mix));
}

}  // namespace negograph::nd
