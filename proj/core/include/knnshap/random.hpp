#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace knnshap {

// SplitMix64 finaliser. Derives independent sub-seeds from (seed, counter) so
// that work items can be generated in any order and still reproduce.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementation.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
  std::uint64_t x = gen();
  while (x >= limit) x = gen();
  return x % bound;
}

// Fisher-Yates shuffle driven by mt19937_64.
template <typename T>
void fisher_yates(std::span<T> items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(gen, i));
    std::swap(items[i - 1], items[j]);
  }
}

// Standard normal via Box-Muller on 53-bit uniforms.
class NormalSampler {
 public:
  double operator()(std::mt19937_64& gen);

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace knnshap
