#pragma once

// Deterministic random helpers. The standard <random> distributions are
// implementation defined, so every draw here is built directly from the
// mt19937_64 bit stream; identical seeds give identical streams everywhere.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "vralab/types.hpp"

namespace vralab {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits.
inline double canonical(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + canonical(rng) * (hi - lo);
}

inline double log_uniform(Rng& rng, double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("log_uniform requires 0 < lo < hi");
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

// Inclusive integer range.
inline long integer_uniform(Rng& rng, long lo, long hi) {
  if (hi < lo) throw std::invalid_argument("integer_uniform requires lo <= hi");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return lo + static_cast<long>(r % span);
}

// Box-Muller, no cached second value.
inline double standard_normal(Rng& rng) {
  double u1;
  do {
    u1 = canonical(rng);
  } while (u1 <= 0.0);
  const double u2 = canonical(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Stream splitter (splitmix64 finalizer over the pair).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename T>
void fisher_yates(Rng& rng, std::vector<T>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(integer_uniform(rng, 0, static_cast<long>(i) - 1));
    std::swap(items[i - 1], items[j]);
  }
}

inline std::vector<Index> random_permutation(Rng& rng, Index n) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  fisher_yates(rng, perm);
  return perm;
}

// Uniform direction on the unit sphere.
template <typename Scalar = double>
Vector<Scalar> random_unit_vector(Rng& rng, Index n) {
  if (n <= 0) throw std::invalid_argument("random_unit_vector requires n > 0");
  Vector<Scalar> v(n);
  double norm_sq = 0.0;
  do {
    for (Index i = 0; i < n; ++i) v[i] = static_cast<Scalar>(standard_normal(rng));
    norm_sq = static_cast<double>(v.squaredNorm());
  } while (norm_sq == 0.0);
  return v / v.norm();
}

}  // namespace vralab
