#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tkge {

// Seeded random stream used everywhere a draw is made. The engine is
// std::mt19937_64 (sequence fixed by the standard); the bounded-int and
// unit-interval draws are implemented here rather than with the standard
// distributions, whose output is implementation-defined, so that a seed
// replays the same stream on any compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be >= 1.
  std::uint64_t uniform_index(std::uint64_t bound) {
    // Rejection sampling to remove modulo bias.
    const std::uint64_t rem = (UINT64_MAX % bound + 1) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (rem == 0 || r <= UINT64_MAX - rem) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform_real(double lo, double hi) {
    return lo + (hi - lo) * uniform_unit();
  }

  // Fisher-Yates, driven by uniform_index for reproducibility.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic sub-seed for stream (tag, index) of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t index = 0) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  state ^= tag * 0x9e3779b97f4a7c15ULL;
  out ^= splitmix64(state);
  state ^= index + 0x9e3779b97f4a7c15ULL;
  out ^= splitmix64(state);
  return out;
}

}  // namespace tkge
