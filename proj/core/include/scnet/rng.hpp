#pragma once

#include <cstdint>
#include <vector>

namespace scnet {

// Deterministic xoshiro256++ stream. The same seed and call sequence yields
// the same values on every platform; std distributions are avoided on purpose
// because their output differs between standard library implementations.
class RngState {
 public:
  explicit RngState(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (both values consumed).
  double normal();

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t state_[4];
  std::uint64_t draws_ = 0;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace scnet
