#include "spinref/bits.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spinref {

std::size_t count_ones(std::span<const Bit> bits) {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), Bit{1}));
}

double empirical_bias(std::span<const Bit> bits) {
  if (bits.empty()) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - 2.0 * static_cast<double>(count_ones(bits)) / static_cast<double>(bits.size());
}

bool is_permutation(std::span<const std::size_t> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t v : perm) {
    if (v >= perm.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Permutation identity_permutation(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return p;
}

Permutation inverse_permutation(std::span<const std::size_t> perm) {
  Permutation inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

Permutation compose(std::span<const std::size_t> first, std::span<const std::size_t> second) {
  if (first.size() != second.size()) throw std::invalid_argument("compose: size mismatch");
  Permutation out(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) out[i] = second[first[i]];
  return out;
}

std::uint64_t integer_root(std::uint64_t n, unsigned degree) {
  if (degree == 0) throw std::invalid_argument("integer_root: degree 0");
  if (degree == 1 || n < 2) return n;
  auto pow_le = [&](std::uint64_t r) {
    // r^degree <= n without overflow
    unsigned __int128 acc = 1;
    for (unsigned i = 0; i < degree; ++i) {
      acc *= r;
      if (acc > n) return false;
    }
    return true;
  };
  auto guess = static_cast<std::uint64_t>(std::pow(static_cast<double>(n), 1.0 / degree));
  std::uint64_t r = guess > 2 ? guess - 2 : 0;
  while (pow_le(r + 1)) ++r;
  while (r > 0 && !pow_le(r)) --r;
  return r;
}

bool is_perfect_cube(std::uint64_t n) {
  std::uint64_t r = integer_root(n, 3);
  return r * r * r == n;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace spinref
