#include "spinref/compiler.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include <json.hpp>

namespace spinref {

namespace {

// Emitters share one interface so every compile routine doubles as its own
// cost model: Recorder writes instructions, Counter only tallies them and
// evaluates the long sweeps in closed form.

class Recorder {
 public:
  explicit Recorder(MachineProgram& prog) : prog_(prog) {}

  std::size_t add_gate(const ReversibleGate& g) { return prog_.add_gate(g); }

  void move_to(std::size_t pos) {
    while (cursor_ < pos) {
      prog_.shift(+1);
      ++cursor_;
    }
    while (cursor_ > pos) {
      prog_.shift(-1);
      --cursor_;
    }
  }
  void gate(std::size_t id) { prog_.gate(id); }
  void swap_register(int which) { prog_.swap_register(which); }

  /// Gates at slots[hi], slots[hi-1], ..., slots[lo + 1].
  void sweep_down(std::span<const std::size_t> slots, std::size_t hi, std::size_t lo, std::size_t id) {
    for (std::size_t t = hi; t > lo; --t) {
      move_to(slots[t]);
      gate(id);
    }
  }

  void permute(std::span<const std::size_t> perm, std::size_t swap_id) {
    const std::size_t n = perm.size();
    const Permutation inv = inverse_permutation(perm);
    std::vector<std::size_t> where(n), at(n);
    for (std::size_t i = 0; i < n; ++i) where[i] = at[i] = i;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t src = inv[t];
      std::size_t p = where[src];
      if (p == t) continue;
      // Bubble the element at p leftwards into slot t.
      move_to(p - 1);
      while (true) {
        gate(swap_id);
        const std::size_t other = at[p - 1];
        std::swap(at[p - 1], at[p]);
        where[src] = p - 1;
        where[other] = p;
        --p;
        if (p == t) break;
        move_to(p - 1);
      }
    }
  }

  std::size_t cursor() const noexcept { return cursor_; }

 private:
  MachineProgram& prog_;
  std::size_t cursor_ = 0;
};

class Counter {
 public:
  std::size_t add_gate(const ReversibleGate&) { return 0; }

  void move_to(std::size_t pos) {
    cost_.shifts += pos > cursor_ ? pos - cursor_ : cursor_ - pos;
    cursor_ = pos;
  }
  void gate(std::size_t) { ++cost_.head_gates; }
  void swap_register(int) { ++cost_.register_swaps; }

  void sweep_down(std::span<const std::size_t> slots, std::size_t hi, std::size_t lo, std::size_t) {
    if (hi <= lo) return;
    move_to(slots[hi]);
    cost_.shifts += slots[hi] - slots[lo + 1];
    cost_.head_gates += hi - lo;
    cursor_ = slots[lo + 1];
  }

  void permute(std::span<const std::size_t> perm, std::size_t) {
    // Position of the element bound for slot t, once slots [0, t) are filled,
    // is t plus the number of still-unplaced elements that started left of it.
    const std::size_t n = perm.size();
    const Permutation inv = inverse_permutation(perm);
    std::vector<std::size_t> tree(n + 1, 0);  // Fenwick tree of placed sources
    auto placed_before = [&](std::size_t i) {
      std::size_t s = 0;
      for (; i > 0; i -= i & (~i + 1)) s += tree[i];
      return s;
    };
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t src = inv[t];
      const std::size_t p = t + (src - placed_before(src));
      for (std::size_t i = src + 1; i <= n; i += i & (~i + 1)) ++tree[i];
      if (p == t) continue;
      move_to(p - 1);
      cost_.head_gates += p - t;
      cost_.shifts += p - t - 1;
      cursor_ = t;
    }
  }

  const ProgramCost& cost() const noexcept { return cost_; }

 private:
  ProgramCost cost_;
  std::size_t cursor_ = 0;
};

/// A set of units, each with one decision (flag) cell and a run of payload
/// cells; payload slots are listed in increasing tape order.
struct Units {
  std::vector<std::size_t> flags;
  std::vector<std::size_t> start;  // offset of each unit's payload in `slots`
  std::vector<std::size_t> slots;
};

/// Moves the payload of every unit whose flag is 0 to the front of the
/// segment, in original order, using the register: y1 holds the flag, y2
/// carries one payload bit along a rotation of the payload slots.
template <class E>
void emit_compaction(E& e, const Units& units, std::size_t n_bits, std::size_t cswap, std::size_t swap_id) {
  const std::size_t total = units.slots.size();
  const std::size_t count = units.flags.size();
  for (std::size_t u = count; u-- > 0;) {
    const std::size_t begin = units.start[u];
    const std::size_t end = u + 1 < count ? units.start[u + 1] : total;
    e.move_to(units.flags[u]);
    e.swap_register(1);
    for (std::size_t s0 = end; s0-- > begin;) {
      e.move_to(units.slots[s0]);
      e.swap_register(2);
      e.sweep_down(units.slots, total - 1, s0, cswap);
      e.move_to(units.slots[s0]);
      e.swap_register(2);
    }
    e.move_to(units.flags[u]);
    e.swap_register(1);
  }

  // The kept payloads now sit at the end of the slot list, unit order and
  // bit order both reversed; one fixed permutation brings them to the front.
  Permutation perm(n_bits);
  std::vector<bool> is_slot(n_bits, false);
  for (std::size_t i = 0; i < total; ++i) {
    perm[units.slots[total - 1 - i]] = i;
    is_slot[units.slots[total - 1 - i]] = true;
  }
  std::size_t next = total;
  for (std::size_t p = 0; p < n_bits; ++p) {
    if (!is_slot[p]) perm[p] = next++;
  }
  e.permute(perm, swap_id);
}

Units bin_units(std::size_t n_bits, std::size_t k, std::size_t header) {
  Units u;
  const std::size_t bins = n_bits / k;
  for (std::size_t b = 0; b < bins; ++b) {
    u.flags.push_back(b * k + header - 1);
    u.start.push_back(u.slots.size());
    for (std::size_t j = header; j < k; ++j) u.slots.push_back(b * k + j);
  }
  return u;
}

template <class E>
void emit_parity_round(E& e, std::size_t n_bits, std::size_t k) {
  const std::size_t bins = n_bits / k;
  if (k == 2) {
    const std::size_t eq = e.add_gate(gates::xor_into_first());
    for (std::size_t b = 0; b < bins; ++b) {
      e.move_to(2 * b);
      e.gate(eq);
    }
  } else {
    const std::size_t acc = e.add_gate(gates::accumulate_parity());
    for (std::size_t b = 0; b < bins; ++b) {
      const std::size_t f = b * k;
      e.move_to(f);
      e.swap_register(1);
      for (std::size_t j = 1; j < k; ++j) {
        e.move_to(f + j);
        e.gate(acc);
      }
      e.move_to(f);
      e.swap_register(1);
    }
  }
  const std::size_t cswap = e.add_gate(gates::controlled_exchange());
  const std::size_t swap_id = e.add_gate(gates::swap());
  emit_compaction(e, bin_units(n_bits, k, 1), n_bits, cswap, swap_id);
  e.move_to(0);
}

template <class E>
void emit_phase3_round(E& e, std::size_t n_bits, std::size_t k) {
  const std::size_t blocks = n_bits / k;
  const std::size_t inc = e.add_gate(gates::counter_increment());
  const std::size_t decide = e.add_gate(gates::or_decision());
  const std::size_t dec = e.add_gate(gates::counter_decrement());
  std::vector<std::size_t> scan;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t base = b * k;
    scan.clear();
    for (std::size_t j = 0; j < k; ++j) {
      if (j != 2) scan.push_back(base + j);
    }
    for (std::size_t p : scan) {
      e.move_to(p);
      e.gate(inc);
    }
    // Third bit of the block becomes z ^ (count != 0); the block passes when it reads 0.
    e.move_to(base + 2);
    e.gate(decide);
    for (auto it = scan.rbegin(); it != scan.rend(); ++it) {
      e.move_to(*it);
      e.gate(dec);
    }
  }
  const std::size_t cswap = e.add_gate(gates::controlled_exchange());
  const std::size_t swap_id = e.add_gate(gates::swap());
  emit_compaction(e, bin_units(n_bits, k, 3), n_bits, cswap, swap_id);
  e.move_to(0);
}

void check_round_args(std::size_t n_bits, std::size_t k, std::size_t min_k) {
  if (k < min_k) throw std::invalid_argument("bin size too small");
  if (n_bits < k) throw std::invalid_argument("segment shorter than one bin");
}

}  // namespace

MachineProgram compile_phase1(std::size_t n_bits) {
  check_round_args(n_bits, 2, 2);
  MachineProgram prog;
  Recorder rec(prog);
  emit_parity_round(rec, n_bits, 2);
  prog.cost_class = "O(N^2)";
  prog.live_capacity = n_bits / 2;
  return prog;
}

MachineProgram compile_phase2_round(std::size_t n_bits, std::size_t k) {
  check_round_args(n_bits, k, 2);
  MachineProgram prog;
  Recorder rec(prog);
  emit_parity_round(rec, n_bits, k);
  prog.cost_class = "O(N^2)";
  prog.live_capacity = (n_bits / k) * (k - 1);
  return prog;
}

MachineProgram compile_phase3_round(std::size_t n_bits, std::size_t k) {
  check_round_args(n_bits, k, 4);
  MachineProgram prog;
  Recorder rec(prog);
  emit_phase3_round(rec, n_bits, k);
  prog.cost_class = "O(N^2)";
  prog.live_capacity = (n_bits / k) * (k - 3);
  return prog;
}

MachineProgram compile_permutation(std::span<const std::size_t> perm) {
  if (!is_permutation(perm)) throw std::invalid_argument("not a permutation");
  MachineProgram prog;
  Recorder rec(prog);
  std::size_t swap_id = prog.add_gate(gates::swap());
  rec.permute(perm, swap_id);
  rec.move_to(0);
  prog.cost_class = "O(n^2)";
  prog.live_capacity = perm.size();
  return prog;
}

ProgramCost phase1_cost(std::size_t n_bits) {
  if (n_bits < 2) return {};
  Counter c;
  emit_parity_round(c, n_bits, 2);
  return c.cost();
}

ProgramCost phase2_round_cost(std::size_t n_bits, std::size_t k) {
  if (k < 2 || n_bits < k) return {};
  Counter c;
  emit_parity_round(c, n_bits, k);
  return c.cost();
}

ProgramCost phase3_round_cost(std::size_t n_bits, std::size_t k) {
  if (k < 4 || n_bits < k) return {};
  Counter c;
  emit_phase3_round(c, n_bits, k);
  return c.cost();
}

ProgramCost permutation_cost(std::span<const std::size_t> perm) {
  if (!is_permutation(perm)) throw std::invalid_argument("not a permutation");
  Counter c;
  c.permute(perm, 0);
  c.move_to(0);
  return c.cost();
}

// Equivalence ----------------------------------------------------------------

std::string EquivalenceReport::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = exhaustive ? "exhaustive" : "sampled";
  j["cases"] = cases;
  j["mismatches"] = mismatches;
  if (witness) {
    std::string s;
    for (Bit b : *witness) s.push_back(b ? '1' : '0');
    j["witness"] = s;
  } else {
    j["witness"] = nullptr;
  }
  return j.dump();
}

EquivalenceReport equivalence_check(const MachineProgram& program, const AbstractFn& abstract,
                                    std::size_t width, const EquivalenceOptions& options) {
  if (width == 0) throw std::invalid_argument("equivalence_check: width must be positive");
  EquivalenceReport report;
  auto check_one = [&](const Bits& input) {
    if (options.domain && !options.domain(input)) return;
    ++report.cases;
    const Bits expected = abstract(input);
    TapeState state(input);
    program.run(state);
    const Bits got = state.logical();
    bool same = expected.size() <= got.size() && std::equal(expected.begin(), expected.end(), got.begin());
    if (!same) {
      ++report.mismatches;
      if (!report.witness) report.witness = input;
    }
  };

  if (width <= options.exhaustive_limit) {
    report.exhaustive = true;
    Bits input(width);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << width); ++x) {
      for (std::size_t i = 0; i < width; ++i) input[i] = static_cast<Bit>((x >> i) & 1u);
      check_one(input);
    }
  } else {
    report.exhaustive = false;
    Rng rng(derive_seed(options.seed, {0xE0u, width}));
    Bits input(width);
    for (std::uint64_t s = 0; s < options.samples; ++s) {
      for (auto& b : input) b = static_cast<Bit>(rng() & 1u);
      check_one(input);
    }
  }
  return report;
}

}  // namespace spinref
