#pragma once

#include <cstdint>
#include <vector>

namespace pml {

// Deterministic, platform-independent PRNG: xoshiro256** seeded through
// splitmix64. Substream k of a generator with seed s is an independent
// generator with seed mix(s, k); the derivation is pure arithmetic on
// (seed, k), so stream layouts are stable across platforms and runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  // Independent child stream; substream(k) of the same seed always yields the
  // same sequence regardless of how much the parent has been consumed.
  Rng substream(std::uint64_t k) const;
  // Seed the k-th substream would use (for recording in file headers).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (pair-cached).
  double normal();
  // Unbiased integer in [0, n); n must be > 0.
  std::uint64_t bounded(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_[4] = {0, 0, 0, 0};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pml
