#pragma once
// Seeded sampling helpers. std::mt19937_64 output is pinned by the standard,
// but the std distributions are not, so the mappings below are hand-rolled to
// keep seeded runs reproducible across standard libraries.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace nnklab::rng {

using Engine = std::mt19937_64;

inline double uniform01(Engine& g) {
  return double(g() >> 11) * 0x1.0p-53;  // [0, 1)
}

// n must be > 0. Modulo bias is ~n/2^64, irrelevant at dataset scale.
inline std::size_t uniform_index(Engine& g, std::size_t n) {
  return std::size_t(g() % std::uint64_t(n));
}

inline double normal(Engine& g) {
  // Box-Muller, one variate per call
  const double u1 = 1.0 - uniform01(g);  // (0, 1]
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Fisher-Yates over the first `count` slots; the prefix is a uniform sample
// without replacement.
template <class T>
void partial_shuffle(std::vector<T>& v, std::size_t count, Engine& g) {
  const std::size_t n = v.size();
  if (count > n) count = n;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + uniform_index(g, n - i);
    std::swap(v[i], v[j]);
  }
}

}  // namespace nnklab::rng
