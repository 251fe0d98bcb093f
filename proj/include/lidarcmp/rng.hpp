#pragma once

#include <cstdint>
#include <string_view>

#include "lidarcmp/types.hpp"

namespace lidarcmp {

// Every stochastic operation in this library draws from SplitMix64 seeded
// explicitly by the caller. The generator and the sampling recipes below are
// pinned so that a reimplementation in another language reproduces the same
// byte-exact streams:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   output = z ^ (z >> 31)
//
//   uniform [0,1)      : (output >> 11) * 2^-53
//   gaussian           : inverse CDF of one uniform (Acklam's rational
//                        approximation, |relative error| < 1.15e-9)
//   point in unit ball : rejection from [-1,1)^3, coordinates drawn x,y,z
//                        per attempt until norm_sq < 1
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 significant bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Standard normal via inverse CDF; consumes exactly one uniform.
  double gaussian();

  /// Uniform point in the open unit ball (rejection sampling).
  Vec3 in_unit_ball();

 private:
  std::uint64_t state_;
};

/// Scramble of the SplitMix64 output function; used by seed derivation.
std::uint64_t scramble64(std::uint64_t x);

/// FNV-1a over the bytes of a string.
std::uint64_t hash_str(std::string_view s);

/// Order-sensitive combination of two seeds. Cell seeds in the harness are
/// built by folding the master seed with scan id, level index and modifier
/// kind through this function.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace lidarcmp
