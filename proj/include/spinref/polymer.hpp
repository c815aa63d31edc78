#pragma once

// Polymer architectures: a ring of typed atoms driven by global pulses that
// transpose every adjacent pair of two given types at once, plus head pulses
// acting only next to a distinguished D (or E) atom.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spinref/bits.hpp"
#include "spinref/cooling.hpp"
#include "spinref/machine.hpp"

namespace spinref {

struct PolymerSpec {
  std::string pattern = "ABC";  // atom types of one period
  std::size_t periods = 1;
  std::size_t d_site = 0;       // head pair is (d_site, d_site + 1)
  std::size_t e_site = 0;       // CA variant: first head pair within a group
  std::size_t d_spacing = 1;    // CA variant: periods between E sites

  std::size_t size() const noexcept { return pattern.size() * periods; }
  char type_at(std::size_t pos) const { return pattern[pos % pattern.size()]; }
  /// Ring position of the i-th atom of type t (i taken mod periods).
  std::size_t position(char t, std::size_t i) const;
  void validate() const;
};

/// Single-tape ABC ring whose head sits on (C_j, A_j+1) for j = periods - 1.
PolymerSpec abc_spec(std::size_t periods);
PolymerSpec abcd_spec(std::size_t periods);

struct PairPulse {
  char x, y;  // transpose all adjacent x-y pairs
  friend bool operator==(const PairPulse&, const PairPulse&) = default;
};
struct CnotPulse {
  char control, target;  // target ^= control on all adjacent pairs
  friend bool operator==(const CnotPulse&, const CnotPulse&) = default;
};
struct HeadPulse {
  std::size_t gate;  // width-2 gate on (d_site, d_site + 1)
  friend bool operator==(const HeadPulse&, const HeadPulse&) = default;
};
struct EHeadPulse {
  std::size_t gate;  // width-2 gate at every E site simultaneously
  friend bool operator==(const EHeadPulse&, const EHeadPulse&) = default;
};
using Pulse = std::variant<PairPulse, CnotPulse, HeadPulse, EHeadPulse>;

struct PulseSequence {
  std::vector<ReversibleGate> gates;
  std::vector<Pulse> pulses;

  std::size_t add_gate(const ReversibleGate& g);
  PulseSequence& then(const PulseSequence& other);
  PulseSequence reversed() const;
  std::string to_text() const;
  static PulseSequence from_text(std::string_view text);
  friend bool operator==(const PulseSequence& a, const PulseSequence& b) {
    return a.gates == b.gates && a.pulses == b.pulses;
  }
};

/// Adjacent position pairs (p, p+1 mod size) whose types are {x, y}.
std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs(const PolymerSpec& spec, char x, char y);

/// Content at ring position i ends at position perm[i]. Head gates must be
/// swaps or identities; CNOT pulses are rejected.
Permutation induced_permutation(const PolymerSpec& spec, const PulseSequence& seq);
/// Runs the sequence on concrete bits (any gates, CNOT layers included).
Bits apply_pulses(const PolymerSpec& spec, const PulseSequence& seq, Bits bits);

/// Disjoint cycles, each starting at its smallest element, ordered by it.
std::vector<std::vector<std::size_t>> track_decomposition(std::span<const std::size_t> perm);

PulseSequence abc_rotate_seq();
PulseSequence two_tape_rotate_seq();
PulseSequence transposition_as_cnots(char x, char y);

struct RealizedShift {
  PulseSequence seq;
  /// Ring position of each logical cell; one application moves the content
  /// of logical cell t to logical cell t + 1 (mod n).
  std::vector<std::size_t> logical_order;
};
RealizedShift realize_abstract_shift(const PolymerSpec& spec);

// Cost models ----------------------------------------------------------------

enum class Architecture { SingleTape, TwoTape, TwoTapeCA };
Architecture parse_architecture(const std::string& name);
std::string to_string(Architecture arch);

struct StrideRun {
  Permutation result;  // where each cell's content ended up
  std::uint64_t pulses = 0;
};
/// Streams the stride shuffle through a two-tape machine one column offset
/// per pass; n must be a cube. Pulses counted at 6 per tape advance.
StrideRun two_tape_stride(std::size_t n);
/// Same passes with all rows processed in parallel by CA pulses.
StrideRun ca_stride(std::size_t n);

struct ArchitectureSteps {
  std::uint64_t initial_permutation = 0;
  std::uint64_t phases = 0;
  std::uint64_t gather = 0;
  std::uint64_t total() const { return initial_permutation + phases + gather; }
};
/// Step count of a finished pipeline run realized on `arch`.
ArchitectureSteps architecture_steps(Architecture arch, const PipelineResult& run, std::size_t n);

}  // namespace spinref
