#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace labelerr {

// xoshiro256** seeded through splitmix64. All derived draws (uniform reals,
// bounded integers, normals) are computed here rather than through <random>
// distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();

  // Uniform integer in [0, bound). Lemire's nearly-divisionless rejection.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Box-Muller; the spare variate is cached.
  double normal();

  // Index drawn with probability proportional to weights (need not sum to 1).
  std::size_t categorical(std::span<const double> weights);

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stateless mix of a seed and a key, used for per-item deterministic draws
// that must not depend on iteration order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key);
std::uint64_t hash_string(std::uint64_t seed, std::string_view text);

}  // namespace labelerr
