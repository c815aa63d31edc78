#include "spinref/machine.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace spinref {

ReversibleGate::ReversibleGate(unsigned width, std::vector<std::uint8_t> table)
    : width_(width), table_(std::move(table)) {
  if (width < 2 || width > 4) throw std::invalid_argument("gate width must be 2, 3 or 4");
  if (table_.size() != (std::size_t{1} << width)) throw std::invalid_argument("gate table has wrong length");
  std::vector<bool> seen(table_.size(), false);
  for (std::uint8_t out : table_) {
    if (out >= table_.size() || seen[out]) throw std::invalid_argument("gate table is not a bijection");
    seen[out] = true;
  }
}

ReversibleGate ReversibleGate::identity(unsigned width) {
  return from_function(width, [](unsigned x) { return x; });
}

ReversibleGate ReversibleGate::inverse() const {
  std::vector<std::uint8_t> inv(table_.size());
  for (std::size_t i = 0; i < table_.size(); ++i) inv[table_[i]] = static_cast<std::uint8_t>(i);
  return ReversibleGate(width_, std::move(inv));
}

namespace gates {

namespace {
struct Tuple4 {
  unsigned c0, c1, y1, y2;
  static Tuple4 decode(unsigned x) { return {(x >> 3) & 1u, (x >> 2) & 1u, (x >> 1) & 1u, x & 1u}; }
  unsigned encode() const { return (c0 << 3) | (c1 << 2) | (y1 << 1) | y2; }
};
}  // namespace

ReversibleGate swap() {
  return ReversibleGate::from_function(2, [](unsigned x) { return ((x & 1u) << 1) | (x >> 1); });
}

ReversibleGate xor_into_first() {
  return ReversibleGate::from_function(2, [](unsigned x) {
    unsigned a = x >> 1, b = x & 1u;
    return ((a ^ b) << 1) | b;
  });
}

ReversibleGate xor_into_second() {
  return ReversibleGate::from_function(2, [](unsigned x) {
    unsigned a = x >> 1, b = x & 1u;
    return (a << 1) | (a ^ b);
  });
}

ReversibleGate accumulate_parity() {
  return ReversibleGate::from_function(3, [](unsigned x) {
    unsigned c0 = (x >> 2) & 1u;
    return x ^ c0;
  });
}

ReversibleGate controlled_exchange() {
  return ReversibleGate::from_function(4, [](unsigned x) {
    Tuple4 t = Tuple4::decode(x);
    if (t.y1 == 0) std::swap(t.c0, t.y2);
    return t.encode();
  });
}

ReversibleGate counter_increment() {
  return ReversibleGate::from_function(4, [](unsigned x) {
    Tuple4 t = Tuple4::decode(x);
    if (t.c0) {
      unsigned v = (2 * t.y1 + t.y2 + 1) & 3u;
      t.y1 = v >> 1;
      t.y2 = v & 1u;
    }
    return t.encode();
  });
}

ReversibleGate counter_decrement() { return counter_increment().inverse(); }

ReversibleGate or_decision() {
  return ReversibleGate::from_function(4, [](unsigned x) {
    Tuple4 t = Tuple4::decode(x);
    t.c0 ^= (t.y1 | t.y2);
    return t.encode();
  });
}

}  // namespace gates

// TapeState ---------------------------------------------------------------

TapeState::TapeState(Bits bits) : cells_(std::move(bits)) {
  if (cells_.empty()) throw std::invalid_argument("tape must hold at least one bit");
  for (Bit b : cells_) {
    if (b > 1) throw std::invalid_argument("tape cells must be 0 or 1");
  }
}

Bits TapeState::logical() const {
  Bits out(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) out[i] = cell(i);
  return out;
}

Bit TapeState::reg(int which) const {
  if (which != 1 && which != 2) throw std::invalid_argument("register index must be 1 or 2");
  return reg_[static_cast<std::size_t>(which - 1)];
}

void TapeState::shift(int direction) {
  const std::size_t n = cells_.size();
  if (direction == 1) {
    head_ = (head_ + 1) % n;
  } else if (direction == -1) {
    head_ = (head_ + n - 1) % n;
  } else {
    throw std::invalid_argument("shift direction must be +1 or -1");
  }
  ++steps_;
}

void TapeState::apply_head_gate(const ReversibleGate& gate) {
  const std::size_t p0 = physical(0), p1 = physical(1);
  const unsigned w = gate.width();
  unsigned in = (unsigned{cells_[p0]} << 1) | cells_[p1];
  if (w >= 3) in = (in << 1) | reg_[0];
  if (w == 4) in = (in << 1) | reg_[1];
  unsigned out = gate(in);
  if (w == 4) {
    reg_[1] = static_cast<Bit>(out & 1u);
    out >>= 1;
  }
  if (w >= 3) {
    reg_[0] = static_cast<Bit>(out & 1u);
    out >>= 1;
  }
  cells_[p1] = static_cast<Bit>(out & 1u);
  cells_[p0] = static_cast<Bit>((out >> 1) & 1u);
  ++steps_;
}

Bit TapeState::measure_first() {
  ++steps_;
  return cells_[physical(0)];
}

void TapeState::ca_parallel_gate(std::size_t spacing, const ReversibleGate& gate) {
  const std::size_t n = cells_.size();
  if (spacing < 2 || n % spacing != 0) throw std::invalid_argument("CA spacing must divide the tape length and be >= 2");
  if (gate.width() != 2) throw std::invalid_argument("CA pulses take width-2 gates");
  for (std::size_t l = 0; l < n; l += spacing) {
    const std::size_t p0 = physical(l), p1 = physical(l + 1);
    unsigned out = gate((unsigned{cells_[p0]} << 1) | cells_[p1]);
    cells_[p0] = static_cast<Bit>(out >> 1);
    cells_[p1] = static_cast<Bit>(out & 1u);
  }
  ++steps_;
}

void TapeState::swap_register(int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("register index must be 1 or 2");
  std::swap(reg_[static_cast<std::size_t>(which - 1)], cells_[physical(0)]);
  ++steps_;
}

// MachineProgram ------------------------------------------------------------

ProgramCost& ProgramCost::operator+=(const ProgramCost& o) {
  shifts += o.shifts;
  head_gates += o.head_gates;
  register_swaps += o.register_swaps;
  measures += o.measures;
  ca_pulses += o.ca_pulses;
  return *this;
}

std::size_t MachineProgram::add_gate(const ReversibleGate& gate) {
  auto it = std::find(gates_.begin(), gates_.end(), gate);
  if (it != gates_.end()) return static_cast<std::size_t>(it - gates_.begin());
  gates_.push_back(gate);
  return gates_.size() - 1;
}

void MachineProgram::push(Instruction op) {
  if (const auto* g = std::get_if<HeadGate>(&op); g && g->gate >= gates_.size())
    throw std::invalid_argument("unknown gate id");
  if (const auto* c = std::get_if<CaPulse>(&op)) {
    if (c->gate >= gates_.size()) throw std::invalid_argument("unknown gate id");
    if (gates_[c->gate].width() != 2) throw std::invalid_argument("CA pulses take width-2 gates");
  }
  if (const auto* s = std::get_if<Shift>(&op); s && s->direction != 1 && s->direction != -1)
    throw std::invalid_argument("shift direction must be +1 or -1");
  if (const auto* r = std::get_if<SwapRegister>(&op); r && r->which != 1 && r->which != 2)
    throw std::invalid_argument("register index must be 1 or 2");
  ops_.push_back(op);
}

ProgramCost MachineProgram::cost() const {
  ProgramCost c;
  for (const auto& op : ops_) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, Shift>) ++c.shifts;
          else if constexpr (std::is_same_v<T, HeadGate>) ++c.head_gates;
          else if constexpr (std::is_same_v<T, SwapRegister>) ++c.register_swaps;
          else if constexpr (std::is_same_v<T, Measure>) ++c.measures;
          else ++c.ca_pulses;
        },
        op);
  }
  return c;
}

Bits MachineProgram::run(TapeState& state, std::size_t begin, std::size_t end,
                         std::vector<TraceEntry>* trace) const {
  Bits measured;
  end = std::min(end, ops_.size());
  for (std::size_t i = begin; i < end; ++i) {
    const Instruction& op = ops_[i];
    if (trace) trace->push_back({op, state.head()});
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, Shift>) state.shift(o.direction);
          else if constexpr (std::is_same_v<T, HeadGate>) state.apply_head_gate(gates_[o.gate]);
          else if constexpr (std::is_same_v<T, SwapRegister>) state.swap_register(o.which);
          else if constexpr (std::is_same_v<T, Measure>) measured.push_back(state.measure_first());
          else state.ca_parallel_gate(o.spacing, gates_[o.gate]);
        },
        op);
  }
  return measured;
}

MachineProgram MachineProgram::inverse() const {
  MachineProgram inv;
  std::vector<std::size_t> remap(gates_.size());
  for (std::size_t i = 0; i < gates_.size(); ++i) remap[i] = inv.add_gate(gates_[i].inverse());
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, Shift>) inv.shift(-o.direction);
          else if constexpr (std::is_same_v<T, HeadGate>) inv.gate(remap[o.gate]);
          else if constexpr (std::is_same_v<T, SwapRegister>) inv.swap_register(o.which);
          else if constexpr (std::is_same_v<T, Measure>) inv.measure();
          else inv.ca_pulse(o.spacing, remap[o.gate]);
        },
        *it);
  }
  inv.cost_class = cost_class;
  return inv;
}

std::string MachineProgram::to_text() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    out << "GATEDEF " << i << ' ' << gates_[i].width();
    for (std::uint8_t v : gates_[i].table()) out << ' ' << unsigned{v};
    out << '\n';
  }
  for (const auto& op : ops_) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, Shift>) out << "SHIFT " << (o.direction > 0 ? "+1" : "-1");
          else if constexpr (std::is_same_v<T, HeadGate>) out << "GATE " << o.gate;
          else if constexpr (std::is_same_v<T, SwapRegister>) out << "SWAPREG " << o.which;
          else if constexpr (std::is_same_v<T, Measure>) out << "MEASURE";
          else out << "CA " << o.spacing << ' ' << o.gate;
        },
        op);
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) words.push_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

std::size_t parse_size(std::string_view word, std::size_t line_no) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
  if (ec != std::errc{} || ptr != word.data() + word.size())
    throw std::invalid_argument("line " + std::to_string(line_no) + ": expected an integer, got '" +
                                std::string(word) + "'");
  return v;
}

}  // namespace

MachineProgram MachineProgram::from_text(std::string_view text) {
  MachineProgram prog;
  std::size_t line_no = 0;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    auto words = split_words(line);
    if (words.empty() || words[0].front() == '#') continue;
    auto bad = [&](const char* what) {
      return std::invalid_argument("line " + std::to_string(line_no) + ": " + what);
    };
    const std::string_view cmd = words[0];
    if (cmd == "GATEDEF") {
      if (words.size() < 3) throw bad("GATEDEF needs an id and a width");
      std::size_t id = parse_size(words[1], line_no);
      auto width = static_cast<unsigned>(parse_size(words[2], line_no));
      if (id != prog.gates_.size()) throw bad("GATEDEF ids must be consecutive from 0");
      std::vector<std::uint8_t> table;
      for (std::size_t i = 3; i < words.size(); ++i)
        table.push_back(static_cast<std::uint8_t>(parse_size(words[i], line_no)));
      prog.gates_.emplace_back(width, std::move(table));
    } else if (cmd == "SHIFT") {
      if (words.size() != 2 || (words[1] != "+1" && words[1] != "-1")) throw bad("SHIFT takes +1 or -1");
      prog.shift(words[1] == "+1" ? 1 : -1);
    } else if (cmd == "GATE") {
      if (words.size() != 2) throw bad("GATE takes one id");
      prog.gate(parse_size(words[1], line_no));
    } else if (cmd == "SWAPREG") {
      if (words.size() != 2) throw bad("SWAPREG takes 1 or 2");
      prog.swap_register(static_cast<int>(parse_size(words[1], line_no)));
    } else if (cmd == "MEASURE") {
      if (words.size() != 1) throw bad("MEASURE takes no operands");
      prog.measure();
    } else if (cmd == "CA") {
      if (words.size() != 3) throw bad("CA takes a spacing and a gate id");
      prog.ca_pulse(parse_size(words[1], line_no), parse_size(words[2], line_no));
    } else {
      throw bad("unknown primitive");
    }
  }
  return prog;
}

}  // namespace spinref
