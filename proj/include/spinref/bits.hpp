#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace spinref {

using Bit = std::uint8_t;
using Bits = std::vector<Bit>;

/// A permutation of [0, n) stored as an image table: element at index i
/// moves to index perm[i].
using Permutation = std::vector<std::size_t>;

std::size_t count_ones(std::span<const Bit> bits);

/// 1 - 2 * (ones / n): the bias towards 0. NaN for an empty sequence.
double empirical_bias(std::span<const Bit> bits);

inline double delta_from_bias(double bias) { return (1.0 - bias) / 2.0; }
inline double bias_from_delta(double delta) { return 1.0 - 2.0 * delta; }

bool is_permutation(std::span<const std::size_t> perm);
Permutation identity_permutation(std::size_t n);
Permutation inverse_permutation(std::span<const std::size_t> perm);

/// Permutation equal to applying `first`, then `second`.
Permutation compose(std::span<const std::size_t> first, std::span<const std::size_t> second);

template <class T>
std::vector<T> apply_permutation(std::span<const T> items, std::span<const std::size_t> perm) {
  std::vector<T> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out[perm[i]] = items[i];
  return out;
}

/// floor(n^(1/degree)), exact in integer arithmetic.
std::uint64_t integer_root(std::uint64_t n, unsigned degree);
bool is_perfect_cube(std::uint64_t n);

// Randomness. All streams are mt19937_64 seeded through splitmix64 so that
// results are reproducible across standard libraries.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream seed for (base, tag...) tuples.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, bound), unbiased (rejection sampling).
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double x);

}  // namespace spinref
