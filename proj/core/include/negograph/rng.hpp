#pragma once

#include <cstdint>
#include <limits>

namespace negograph::nd {

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator so it plugs
/// into <random> distributions.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Standard normal via Box-Muller (no cached spare, so draws are stateless
  /// beyond the generator itself).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4]{};
};

/// Independent streams so that consumers do not perturb each other's draws:
/// changing dropout never shifts initialization, and so on.
enum class Stream : std::uint64_t {
  init = 1,
  dropout = 2,
  shuffle = 3,
  sampling = 4,
  synth = 5,
};

Xoshiro256 make_stream(std::uint64_t seed, Stream stream);

}  // namespace negograph::nd
