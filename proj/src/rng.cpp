#include "qkdsim/rng.hpp"

namespace qkd {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t SeededRng::next_u64() {
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

double SeededRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::next_below(std::uint64_t bound) {
  // Rejection sampling on the top bits; unbiased and platform independent.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

int SeededRng::next_bit() { return static_cast<int>(next_u64() >> 63); }

bool SeededRng::bernoulli(double p) { return next_double() < p; }

SeededRng SeededRng::fork(std::uint64_t stream) const {
  std::uint64_t mix = state_[0] ^ rotl(state_[2], 31) ^ (stream * 0x9e3779b97f4a7c15ULL);
  return SeededRng(mix + stream);
}

}  // namespace qkd
