#pragma once

// The abstract bulk-NMR machine: a cyclic tape of classical bits, a head that
// sees two adjacent cells, and a two-bit register carried with the head.
// Every primitive is a bijection on (cells, register) and costs one step.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spinref/bits.hpp"

namespace spinref {

/// Classical reversible gate on 2, 3 or 4 bits.
///
/// Tuple order is (c0, c1, y1, y2): the two cells under the head, then the
/// register bits for widths 3 and 4. The tuple is encoded as an integer with
/// c0 as the most significant bit, so for width 2 the index is 2*c0 + c1.
class ReversibleGate {
 public:
  ReversibleGate(unsigned width, std::vector<std::uint8_t> table);

  template <class F>
  static ReversibleGate from_function(unsigned width, F&& f) {
    std::vector<std::uint8_t> table(std::size_t{1} << width);
    for (std::size_t i = 0; i < table.size(); ++i) table[i] = static_cast<std::uint8_t>(f(static_cast<unsigned>(i)));
    return ReversibleGate(width, std::move(table));
  }
  static ReversibleGate identity(unsigned width);

  unsigned width() const noexcept { return width_; }
  std::uint8_t operator()(unsigned input) const { return table_[input]; }
  const std::vector<std::uint8_t>& table() const noexcept { return table_; }
  ReversibleGate inverse() const;

  friend bool operator==(const ReversibleGate&, const ReversibleGate&) = default;

 private:
  unsigned width_;
  std::vector<std::uint8_t> table_;
};

namespace gates {
ReversibleGate swap();               // (a, b) -> (b, a)
ReversibleGate xor_into_first();     // (a, b) -> (a^b, b): |01>->|11>, |11>->|01>
ReversibleGate xor_into_second();    // (a, b) -> (a, a^b)
ReversibleGate accumulate_parity();  // width 3: y1 ^= c0
ReversibleGate controlled_exchange();  // width 4: if y1 == 0, c0 <-> y2
ReversibleGate counter_increment();  // width 4: if c0, (2*y1 + y2) += 1 mod 4
ReversibleGate counter_decrement();  // width 4: inverse of counter_increment
ReversibleGate or_decision();        // width 4: c0 ^= (y1 | y2)
}  // namespace gates

class TapeState {
 public:
  /// Fresh tape: head on cell 0, register (0, 0), zero steps.
  explicit TapeState(Bits bits);

  std::size_t size() const noexcept { return cells_.size(); }
  /// Physical index of the cell under the head.
  std::size_t head() const noexcept { return head_; }
  std::uint64_t steps() const noexcept { return steps_; }

  /// Cell at `offset` positions to the right of the head.
  Bit cell(std::size_t offset) const { return cells_[physical(offset)]; }
  /// Cells in physical order.
  const Bits& cells() const noexcept { return cells_; }
  /// Cells read starting at the head.
  Bits logical() const;
  Bit reg(int which) const;
  std::array<Bit, 2> reg() const noexcept { return reg_; }

  // Primitives.
  void shift(int direction);
  void apply_head_gate(const ReversibleGate& gate);
  Bit measure_first();
  void ca_parallel_gate(std::size_t spacing, const ReversibleGate& gate);
  void swap_register(int which);

  friend bool operator==(const TapeState&, const TapeState&) = default;

 private:
  std::size_t physical(std::size_t offset) const { return (head_ + offset) % cells_.size(); }

  Bits cells_;
  std::size_t head_ = 0;
  std::array<Bit, 2> reg_{0, 0};
  std::uint64_t steps_ = 0;
};

// Program representation -------------------------------------------------

struct Shift {
  int direction;  // +1 or -1
  friend bool operator==(const Shift&, const Shift&) = default;
};
struct HeadGate {
  std::size_t gate;
  friend bool operator==(const HeadGate&, const HeadGate&) = default;
};
struct SwapRegister {
  int which;  // 1 or 2
  friend bool operator==(const SwapRegister&, const SwapRegister&) = default;
};
struct Measure {
  friend bool operator==(const Measure&, const Measure&) = default;
};
struct CaPulse {
  std::size_t spacing;
  std::size_t gate;
  friend bool operator==(const CaPulse&, const CaPulse&) = default;
};

using Instruction = std::variant<Shift, HeadGate, SwapRegister, Measure, CaPulse>;

/// Primitive counts by kind.
struct ProgramCost {
  std::uint64_t shifts = 0;
  std::uint64_t head_gates = 0;
  std::uint64_t register_swaps = 0;
  std::uint64_t measures = 0;
  std::uint64_t ca_pulses = 0;

  std::uint64_t total() const noexcept { return shifts + head_gates + register_swaps + measures + ca_pulses; }
  ProgramCost& operator+=(const ProgramCost& o);
  friend bool operator==(const ProgramCost&, const ProgramCost&) = default;
};

/// One executed primitive and where the head stood when it ran.
struct TraceEntry {
  Instruction op;
  std::size_t head;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

class MachineProgram {
 public:
  /// Registers a gate and returns its id; identical tables share an id.
  std::size_t add_gate(const ReversibleGate& gate);
  const std::vector<ReversibleGate>& gates() const noexcept { return gates_; }

  void push(Instruction op);
  void shift(int direction) { push(Shift{direction}); }
  void gate(std::size_t id) { push(HeadGate{id}); }
  void swap_register(int which) { push(SwapRegister{which}); }
  void measure() { push(Measure{}); }
  void ca_pulse(std::size_t spacing, std::size_t id) { push(CaPulse{spacing, id}); }

  const std::vector<Instruction>& instructions() const noexcept { return ops_; }
  std::size_t size() const noexcept { return ops_.size(); }
  ProgramCost cost() const;

  /// Runs instructions [begin, end) and returns the measured bits.
  Bits run(TapeState& state, std::size_t begin = 0, std::size_t end = SIZE_MAX,
           std::vector<TraceEntry>* trace = nullptr) const;

  /// Program that undoes this one (measurements are kept as no-op reads).
  MachineProgram inverse() const;

  /// Line-oriented trace text: GATEDEF lines, then one primitive per line.
  std::string to_text() const;
  static MachineProgram from_text(std::string_view text);

  // Metadata.
  std::string cost_class;
  /// Upper bound on the live (kept) region after the program; discards lie beyond it.
  std::size_t live_capacity = 0;

  friend bool operator==(const MachineProgram& a, const MachineProgram& b) {
    return a.gates_ == b.gates_ && a.ops_ == b.ops_;
  }

 private:
  std::vector<ReversibleGate> gates_;
  std::vector<Instruction> ops_;
};

}  // namespace spinref
