#pragma once

#include <cstdint>
#include <random>

namespace pmgame {

// All randomness in the project flows through this generator. The engine is
// std::mt19937_64, whose output sequence is fixed by the C++ standard; the
// helpers below only use raw 64-bit draws so results are identical across
// standard libraries (std::*_distribution is implementation-defined).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  result_type operator()() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p >= 1.0) {
      return true;
    }
    if (p <= 0.0) {
      return false;
    }
    return uniform01() < p;
  }

  // Uniform integer in [0, bound) by rejection sampling; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) {
      x = engine_();
    }
    return x % bound;
  }

  template <class Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(c[i - 1], c[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer, used to derive independent sub-seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace pmgame
