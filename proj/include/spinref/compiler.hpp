#pragma once

// Lowering of the cooling rounds onto machine primitives.
//
// Every compiled round works on a segment of N cells starting at the head,
// leaves the kept bits (in their original order) as a prefix of the segment,
// moves the discards behind them, restores the register and returns the
// head to the segment start. The instruction stream depends only on the
// parameters, never on the data.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "spinref/bits.hpp"
#include "spinref/machine.hpp"

namespace spinref {

/// Pair rounds: bins of two, x1 <- x1 ^ x2, keep x2 when the pair was equal.
MachineProgram compile_phase1(std::size_t n_bits);
/// Parity-bin round on consecutive bins of k (the caller shuffles beforehand).
MachineProgram compile_phase2_round(std::size_t n_bits, std::size_t k);
/// Mod-4 count round on consecutive blocks of k; assumes a clean register.
MachineProgram compile_phase3_round(std::size_t n_bits, std::size_t k);
/// Realizes a fixed permutation of the first perm.size() cells with head swaps.
MachineProgram compile_permutation(std::span<const std::size_t> perm);

// Closed-form primitive counts, equal to compile_*(...).cost() but computed
// without emitting the O(N^2) instruction stream.
ProgramCost phase1_cost(std::size_t n_bits);
ProgramCost phase2_round_cost(std::size_t n_bits, std::size_t k);
ProgramCost phase3_round_cost(std::size_t n_bits, std::size_t k);
ProgramCost permutation_cost(std::span<const std::size_t> perm);

/// Result of comparing a compiled program against its abstract semantics.
struct EquivalenceReport {
  bool exhaustive = true;
  std::uint64_t cases = 0;
  std::uint64_t mismatches = 0;
  std::optional<Bits> witness;  // first mismatching input

  bool agree() const noexcept { return mismatches == 0; }
  std::string to_json() const;
};

using AbstractFn = std::function<Bits(std::span<const Bit>)>;

struct EquivalenceOptions {
  /// Inputs outside the domain are skipped (not counted).
  std::function<bool(std::span<const Bit>)> domain;
  std::size_t exhaustive_limit = 16;
  std::uint64_t samples = 1000;
  std::uint64_t seed = 1;
};

/// Runs `program` on a fresh tape holding each input and compares the first
/// |abstract(input)| cells read from the head with abstract(input).
EquivalenceReport equivalence_check(const MachineProgram& program, const AbstractFn& abstract,
                                    std::size_t width, const EquivalenceOptions& options = {});

}  // namespace spinref
