#pragma once

// Initial thermal bit strings and the permutations used to decorrelate them.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "spinref/bits.hpp"
#include "spinref/machine.hpp"

namespace spinref {

enum class ModelKind { Binomial, MarkovCorrelated };

struct BiasModel {
  ModelKind kind = ModelKind::Binomial;
  double epsilon = 0.0;    // P(bit = 0) = (1 + epsilon) / 2
  double ell = 1.0;        // correlation distance (Markov only)
  double threshold = 0.1;  // correlation reached at distance ell

  void validate() const;
  /// Lag-one correlation of the Markov chain: threshold^(1/ell).
  double rho() const;
};

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

/// n bits drawn from the model; deterministic per seed.
Bits sample(const BiasModel& model, std::size_t n, std::uint64_t seed);

/// Sends r*m + s to ((r + s) mod m^2)*m + s with m = n^(1/3). n must be a cube.
Permutation stride_shuffle_perm(std::size_t n);
Permutation uniform_random_perm(std::size_t n, std::uint64_t seed);
/// Same as uniform_random_perm but drawing from an existing stream.
Permutation uniform_random_perm(std::size_t n, Rng& rng);

/// Runs `perm` on the first perm.size() cells of the tape using head swaps
/// (head must be at the segment start); returns the number of steps used.
std::uint64_t apply_perm_as_transpositions(TapeState& state, std::span<const std::size_t> perm);

// Serialization: packed form is a little-endian uint64 bit count followed by
// the bits, eight per byte, least significant bit first.
void write_packed(std::ostream& out, std::span<const Bit> bits);
Bits read_packed(std::istream& in);
std::string to_ascii(std::span<const Bit> bits, std::size_t line_width = 64);
Bits from_ascii(std::string_view text);

}  // namespace spinref
