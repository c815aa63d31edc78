#include "spinref/polymer.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace spinref {

std::size_t PolymerSpec::position(char t, std::size_t i) const {
  const auto at = pattern.find(t);
  if (at == std::string::npos) throw std::invalid_argument(std::string("atom type not in pattern: ") + t);
  return (i % periods) * pattern.size() + at;
}

void PolymerSpec::validate() const {
  if (pattern.empty()) throw std::invalid_argument("polymer pattern is empty");
  if (periods == 0) throw std::invalid_argument("polymer needs at least one period");
  if (size() < 2) throw std::invalid_argument("polymer ring needs at least two atoms");
  if (d_site >= size() || e_site >= size()) throw std::invalid_argument("head site outside the ring");
  if (d_spacing == 0 || periods % d_spacing != 0) throw std::invalid_argument("d_spacing must divide periods");
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern.find(pattern[i]) != i) throw std::invalid_argument("pattern repeats an atom type");
  }
}

PolymerSpec abc_spec(std::size_t periods) {
  PolymerSpec s;
  s.pattern = "ABC";
  s.periods = periods;
  s.d_site = s.position('C', periods - 1);
  s.validate();
  return s;
}

PolymerSpec abcd_spec(std::size_t periods) {
  PolymerSpec s;
  s.pattern = "ABCD";
  s.periods = periods;
  s.d_site = s.position('D', periods - 1);
  s.validate();
  return s;
}

std::size_t PulseSequence::add_gate(const ReversibleGate& g) {
  if (g.width() != 2) throw std::invalid_argument("head pulses take width-2 gates");
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i] == g) return i;
  }
  gates.push_back(g);
  return gates.size() - 1;
}

PulseSequence& PulseSequence::then(const PulseSequence& other) {
  for (const Pulse& p : other.pulses) {
    if (const auto* h = std::get_if<HeadPulse>(&p)) {
      pulses.push_back(HeadPulse{add_gate(other.gates[h->gate])});
    } else if (const auto* e = std::get_if<EHeadPulse>(&p)) {
      pulses.push_back(EHeadPulse{add_gate(other.gates[e->gate])});
    } else {
      pulses.push_back(p);
    }
  }
  return *this;
}

PulseSequence PulseSequence::reversed() const {
  PulseSequence out;
  out.gates = gates;
  for (auto it = pulses.rbegin(); it != pulses.rend(); ++it) {
    Pulse p = *it;
    if (auto* h = std::get_if<HeadPulse>(&p)) h->gate = out.add_gate(gates[h->gate].inverse());
    if (auto* e = std::get_if<EHeadPulse>(&p)) e->gate = out.add_gate(gates[e->gate].inverse());
    out.pulses.push_back(p);
  }
  return out;
}

std::string PulseSequence::to_text() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    os << "GATEDEF " << i << " 2";
    for (auto v : gates[i].table()) os << ' ' << unsigned{v};
    os << '\n';
  }
  for (const Pulse& p : pulses) {
    std::visit(
        [&](const auto& q) {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, PairPulse>) os << "P(" << q.x << ',' << q.y << ")\n";
          if constexpr (std::is_same_v<T, CnotPulse>) os << "CNOT(" << q.control << ',' << q.target << ")\n";
          if constexpr (std::is_same_v<T, HeadPulse>) os << "HEAD " << q.gate << '\n';
          if constexpr (std::is_same_v<T, EHeadPulse>) os << "EHEAD " << q.gate << '\n';
        },
        p);
  }
  return os.str();
}

PulseSequence PulseSequence::from_text(std::string_view text) {
  PulseSequence seq;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("pulse text line " + std::to_string(lineno) + ": " + what);
  };
  auto pair_of = [&](const std::string& s, std::size_t open) {
    // "X,Y)" after the opening parenthesis
    if (s.size() != open + 4 || s[open + 1] != ',' || s[open + 3] != ')') fail("malformed pair '" + s + "'");
    return std::pair<char, char>{s[open], s[open + 2]};
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "GATEDEF") {
      std::size_t id = 0;
      unsigned width = 0;
      if (!(ls >> id >> width) || id != seq.gates.size()) fail("bad GATEDEF header");
      std::vector<std::uint8_t> table;
      unsigned v;
      while (ls >> v) table.push_back(static_cast<std::uint8_t>(v));
      try {
        seq.gates.emplace_back(width, std::move(table));
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
    } else if (word.rfind("P(", 0) == 0) {
      auto [x, y] = pair_of(word, 2);
      seq.pulses.push_back(PairPulse{x, y});
    } else if (word.rfind("CNOT(", 0) == 0) {
      auto [x, y] = pair_of(word, 5);
      seq.pulses.push_back(CnotPulse{x, y});
    } else if (word == "HEAD" || word == "EHEAD") {
      std::size_t id;
      if (!(ls >> id) || id >= seq.gates.size()) fail("unknown gate id");
      if (word == "HEAD") {
        seq.pulses.push_back(HeadPulse{id});
      } else {
        seq.pulses.push_back(EHeadPulse{id});
      }
    } else {
      fail("unknown mnemonic '" + word + "'");
    }
  }
  return seq;
}

std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs(const PolymerSpec& spec, char x, char y) {
  if (x == y) throw std::invalid_argument("pulse pairs need two distinct atom types");
  const std::size_t n = spec.size();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::vector<bool> used(n, false);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t q = (p + 1) % n;
    const char a = spec.type_at(p), b = spec.type_at(q);
    if ((a == x && b == y) || (a == y && b == x)) {
      if (used[p] || used[q]) throw std::invalid_argument(std::string("pulse (") + x + ',' + y + ") overlaps itself");
      used[p] = used[q] = true;
      out.emplace_back(p, q);
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string("types ") + x + " and " + y + " are never adjacent");
  return out;
}

namespace {

std::vector<std::size_t> e_sites(const PolymerSpec& spec) {
  std::vector<std::size_t> sites;
  const std::size_t step = spec.d_spacing * spec.pattern.size();
  for (std::size_t p = spec.e_site % step; p < spec.size(); p += step) sites.push_back(p);
  return sites;
}

bool is_swap(const ReversibleGate& g) { return g == gates::swap(); }
bool is_identity(const ReversibleGate& g) { return g == ReversibleGate::identity(2); }

}  // namespace

Permutation induced_permutation(const PolymerSpec& spec, const PulseSequence& seq) {
  spec.validate();
  const std::size_t n = spec.size();
  // at[p] = original position of the content now at p
  std::vector<std::size_t> at = identity_permutation(n);
  auto head_swap = [&](std::size_t gate, std::size_t site) {
    const ReversibleGate& g = seq.gates.at(gate);
    if (is_identity(g)) return;
    if (!is_swap(g)) throw std::invalid_argument("induced_permutation: head gate is not a transposition");
    std::swap(at[site], at[(site + 1) % n]);
  };
  for (const Pulse& p : seq.pulses) {
    if (const auto* pp = std::get_if<PairPulse>(&p)) {
      for (auto [a, b] : adjacent_pairs(spec, pp->x, pp->y)) std::swap(at[a], at[b]);
    } else if (const auto* h = std::get_if<HeadPulse>(&p)) {
      head_swap(h->gate, spec.d_site);
    } else if (const auto* e = std::get_if<EHeadPulse>(&p)) {
      for (std::size_t s : e_sites(spec)) head_swap(e->gate, s);
    } else {
      throw std::invalid_argument("induced_permutation: CNOT pulses do not permute positions");
    }
  }
  return inverse_permutation(at);
}

Bits apply_pulses(const PolymerSpec& spec, const PulseSequence& seq, Bits bits) {
  spec.validate();
  const std::size_t n = spec.size();
  if (bits.size() != n) throw std::invalid_argument("apply_pulses: bit count differs from ring size");
  auto apply_gate = [&](std::size_t gate, std::size_t site) {
    const ReversibleGate& g = seq.gates.at(gate);
    const std::size_t q = (site + 1) % n;
    const unsigned out = g((unsigned{bits[site]} << 1) | bits[q]);
    bits[site] = static_cast<Bit>(out >> 1);
    bits[q] = static_cast<Bit>(out & 1u);
  };
  for (const Pulse& p : seq.pulses) {
    if (const auto* pp = std::get_if<PairPulse>(&p)) {
      for (auto [a, b] : adjacent_pairs(spec, pp->x, pp->y)) std::swap(bits[a], bits[b]);
    } else if (const auto* c = std::get_if<CnotPulse>(&p)) {
      for (auto [a, b] : adjacent_pairs(spec, c->control, c->target)) {
        if (spec.type_at(a) == c->control) {
          bits[b] ^= bits[a];
        } else {
          bits[a] ^= bits[b];
        }
      }
    } else if (const auto* h = std::get_if<HeadPulse>(&p)) {
      apply_gate(h->gate, spec.d_site);
    } else if (const auto* e = std::get_if<EHeadPulse>(&p)) {
      for (std::size_t s : e_sites(spec)) apply_gate(e->gate, s);
    }
  }
  return bits;
}

std::vector<std::vector<std::size_t>> track_decomposition(std::span<const std::size_t> perm) {
  if (!is_permutation(perm)) throw std::invalid_argument("track_decomposition: not a permutation");
  std::vector<bool> seen(perm.size(), false);
  std::vector<std::vector<std::size_t>> cycles;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::vector<std::size_t> cycle;
    for (std::size_t j = i; !seen[j]; j = perm[j]) {
      seen[j] = true;
      cycle.push_back(j);
    }
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

PulseSequence abc_rotate_seq() {
  PulseSequence s;
  s.pulses = {PairPulse{'A', 'B'}, PairPulse{'C', 'A'}, PairPulse{'B', 'C'}};
  return s;
}

PulseSequence two_tape_rotate_seq() {
  PulseSequence s;
  s.pulses = {PairPulse{'A', 'B'}, PairPulse{'B', 'C'}, PairPulse{'A', 'B'},
              PairPulse{'C', 'D'}, PairPulse{'A', 'D'}, PairPulse{'C', 'D'}};
  return s;
}

PulseSequence transposition_as_cnots(char x, char y) {
  if (x == y) throw std::invalid_argument("transposition needs two distinct atom types");
  PulseSequence s;
  s.pulses = {CnotPulse{x, y}, CnotPulse{y, x}, CnotPulse{x, y}};
  return s;
}

RealizedShift realize_abstract_shift(const PolymerSpec& spec) {
  spec.validate();
  if (spec.pattern != "ABC") throw std::invalid_argument("realize_abstract_shift needs an ABC ring");
  if (spec.type_at(spec.d_site) != 'C') throw std::invalid_argument("head site must be a C atom followed by A");
  RealizedShift out;
  out.seq.pulses.push_back(PairPulse{'A', 'B'});
  out.seq.pulses.push_back(HeadPulse{out.seq.add_gate(gates::swap())});
  out.seq.pulses.push_back(PairPulse{'C', 'A'});
  out.seq.pulses.push_back(PairPulse{'B', 'C'});

  const Permutation perm = induced_permutation(spec, out.seq);
  std::size_t p = spec.d_site;
  for (std::size_t t = 0; t < perm.size(); ++t) {
    out.logical_order.push_back(p);
    p = perm[p];
  }
  if (p != spec.d_site) throw std::logic_error("realized shift is not a single cycle");
  std::vector<std::size_t> sorted = out.logical_order;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::logic_error("realized shift is not a single cycle");
  }
  return out;
}

// Cost models ----------------------------------------------------------------

Architecture parse_architecture(const std::string& name) {
  if (name == "single") return Architecture::SingleTape;
  if (name == "two_tape") return Architecture::TwoTape;
  if (name == "two_tape_ca") return Architecture::TwoTapeCA;
  throw std::invalid_argument("unknown architecture '" + name + "'");
}

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::SingleTape: return "single";
    case Architecture::TwoTape: return "two_tape";
    case Architecture::TwoTapeCA: return "two_tape_ca";
  }
  return "?";
}

namespace {
constexpr std::uint64_t kAdvance = 6;  // pulses per one-cell move of the tapes
}

StrideRun two_tape_stride(std::size_t n) {
  if (n == 0 || !is_perfect_cube(n)) throw std::invalid_argument("stride shuffle needs a perfect cube");
  const std::size_t m = integer_root(n, 3);
  const std::size_t rows = m * m;
  // tape[p] = original index of the content at p; buffer is the second tape.
  std::vector<std::size_t> tape = identity_permutation(n);
  std::vector<std::size_t> buffer(m, SIZE_MAX);
  StrideRun run;
  for (std::size_t t = 1; t < m; ++t) {
    // Columns s >= t move down one row: each row hands them to the buffer
    // and takes the previous row's; row 0 is visited twice to close the cycle.
    for (std::size_t q = 0; q <= rows; ++q) {
      const std::size_t r = q % rows;
      for (std::size_t s = 0; s < m; ++s) {
        if (s >= t) {
          std::swap(tape[r * m + s], buffer[s]);
          ++run.pulses;
        }
        run.pulses += kAdvance;
      }
      run.pulses += kAdvance * m;  // rewind the buffer tape
    }
    run.pulses += kAdvance * (n - m);  // back to the start of tape 1
  }
  run.result.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) run.result[tape[p]] = p;
  return run;
}

StrideRun ca_stride(std::size_t n) {
  if (n == 0 || !is_perfect_cube(n)) throw std::invalid_argument("stride shuffle needs a perfect cube");
  const std::size_t m = integer_root(n, 3);
  const std::size_t rows = m * m;
  std::vector<std::size_t> tape = identity_permutation(n);
  StrideRun run;
  for (std::size_t t = 1; t < m; ++t) {
    // Every row exchanges with its successor in parallel: one pulse per
    // column plus the lockstep advance and the buffer rewind.
    std::vector<std::size_t> next = tape;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t s = t; s < m; ++s) next[((r + 1) % rows) * m + s] = tape[r * m + s];
    }
    tape = std::move(next);
    run.pulses += m * (kAdvance + 1) + kAdvance * m;
  }
  run.result.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) run.result[tape[p]] = p;
  return run;
}

ArchitectureSteps architecture_steps(Architecture arch, const PipelineResult& run, std::size_t n) {
  ArchitectureSteps out;
  if (arch == Architecture::SingleTape) {
    out.initial_permutation = run.steps.initial_permutation;
    out.phases = run.steps.phases[0] + run.steps.phases[1] + run.steps.phases[2];
    out.gather = run.steps.gather;
    return out;
  }
  const std::size_t m = integer_root(n, 3);
  const std::size_t cube = m * m * m;
  if (run.steps.initial_permutation > 0 && cube >= 8) {
    out.initial_permutation = arch == Architecture::TwoTape ? two_tape_stride(cube).pulses : ca_stride(cube).pulses;
  }
  auto weighted = [](const ProgramCost& c) { return kAdvance * c.shifts + (c.total() - c.shifts); };
  for (const RoundRecord& r : run.records) {
    out.phases += arch == Architecture::TwoTape ? weighted(r.cost) : weighted(r.max_block);
  }
  if (run.blocks > 1) out.gather = kAdvance * n + 7 * run.clean_bits;
  return out;
}

}  // namespace spinref
