#pragma once

#include <cstdint>

namespace qkd {

// xoshiro256++ with splitmix64 seeding. The standard <random> engines are
// reproducible, but the distributions on top of them are not guaranteed
// bit-identical across library implementations; every sampling decision in
// the simulator must replay exactly from a seed, so we generate uniforms
// ourselves.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double next_double();

  // Uniform in [0, bound). bound must be nonzero.
  std::uint64_t next_below(std::uint64_t bound);

  int next_bit();

  bool bernoulli(double p);

  // Independent child stream, e.g. one per session of a sweep.
  SeededRng fork(std::uint64_t stream) const;

 private:
  std::uint64_t state_[4];
};

}  // namespace qkd
