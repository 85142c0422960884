#pragma once

#include <cstdint>
#include <initializer_list>

namespace smc {

/// SplitMix64 finalizer. Used for seeding and for stable seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Stable hash of a base seed and a sequence of indices. Each index is folded in
/// with a SplitMix64 round, so derive_seed(s, {i, j, t}) never depends on how many
/// other trials or cells exist.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

/// xoshiro256** generator. Gaussian variates use the polar-free Box-Muller
/// transform on two 53-bit uniforms; the second variate of each pair is cached.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Standard normal.
  double normal();
  bool bernoulli(double probability) { return uniform() < probability; }

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace smc
