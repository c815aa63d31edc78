#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "spinref/compiler.hpp"
#include "spinref/cooling.hpp"
#include "spinref/thermal.hpp"

using namespace spinref;

namespace {

Bits run_prefix(const MachineProgram& p, const Bits& in, std::size_t keep) {
  TapeState t(in);
  p.run(t);
  Bits out = t.logical();
  out.resize(keep);
  return out;
}

Bits random_bits(std::mt19937_64& rng, std::size_t n) {
  Bits b(n);
  for (auto& x : b) x = rng() & 1;
  return b;
}

}  // namespace

TEST_CASE("phase 1 on a single pair") {
  const MachineProgram p = compile_phase1(2);
  CHECK(run_prefix(p, {0, 0}, 1) == Bits{0});
  CHECK(run_prefix(p, {1, 1}, 1) == Bits{1});
}

TEST_CASE("phase 1 matches the abstract round on all 8-bit inputs") {
  const MachineProgram p = compile_phase1(8);
  const auto rep = equivalence_check(p, [](std::span<const Bit> b) { return phase1_round(b).bits; }, 8);
  CHECK(rep.exhaustive);
  CHECK(rep.cases == 256);
  CHECK(rep.mismatches == 0);
  CHECK_FALSE(rep.witness);
}

TEST_CASE("phase 1 with an odd segment drops the trailing bit") {
  const MachineProgram p = compile_phase1(7);
  const auto rep = equivalence_check(p, [](std::span<const Bit> b) { return phase1_round(b).bits; }, 7);
  CHECK(rep.agree());
}

TEST_CASE("phase 1 sampled at 64 bits") {
  const MachineProgram p = compile_phase1(64);
  EquivalenceOptions o;
  o.samples = 300;
  const auto rep = equivalence_check(p, [](std::span<const Bit> b) { return phase1_round(b).bits; }, 64, o);
  CHECK_FALSE(rep.exhaustive);
  CHECK(rep.cases == 300);
  CHECK(rep.mismatches == 0);
}

TEST_CASE("phase 2 rounds match the abstract bins") {
  CHECK(run_prefix(compile_phase2_round(3, 3), {0, 0, 0}, 2) == Bits{0, 0});
  CHECK(run_prefix(compile_phase2_round(3, 3), {1, 1, 0}, 2) == Bits{1, 0});
  for (std::size_t k : {2u, 3u, 4u, 5u}) {
    const std::size_t n = 12;
    const auto rep = equivalence_check(compile_phase2_round(n, k),
                                       [k](std::span<const Bit> b) { return phase2_bins(b, k).bits; }, n);
    CHECK(rep.exhaustive);
    CHECK(rep.cases == 4096);
    CHECK(rep.mismatches == 0);
  }
}

TEST_CASE("phase 3 round on clean block heads") {
  EquivalenceOptions o;
  o.domain = [](std::span<const Bit> b) { return b[0] == 0 && b[1] == 0 && b[2] == 0; };
  const auto rep = equivalence_check(compile_phase3_round(8, 8),
                                     [](std::span<const Bit> b) { return phase3_blocks(b, 8).bits; }, 8, o);
  CHECK(rep.cases == 32);
  CHECK(rep.mismatches == 0);
  CHECK(run_prefix(compile_phase3_round(10, 10), Bits(10, 0), 7) == Bits(7, 0));

  // Two blocks of 6, both heads clean.
  o.domain = [](std::span<const Bit> b) {
    return b[0] == 0 && b[1] == 0 && b[2] == 0 && b[6] == 0 && b[7] == 0 && b[8] == 0;
  };
  const auto two = equivalence_check(compile_phase3_round(12, 6),
                                     [](std::span<const Bit> b) { return phase3_blocks(b, 6).bits; }, 12, o);
  CHECK(two.cases == 64);
  CHECK(two.mismatches == 0);
}

TEST_CASE("phase 3 counter holds the ones count mod 4 before the decision") {
  const MachineProgram p = compile_phase3_round(8, 8);
  const std::size_t decide = [&] {
    for (std::size_t i = 0; i < p.gates().size(); ++i) {
      if (p.gates()[i] == gates::or_decision()) return i;
    }
    return SIZE_MAX;
  }();
  REQUIRE(decide != SIZE_MAX);
  std::size_t stop = 0;
  while (!(std::holds_alternative<HeadGate>(p.instructions()[stop]) &&
           std::get<HeadGate>(p.instructions()[stop]).gate == decide)) {
    ++stop;
  }
  for (unsigned x = 0; x < 256; ++x) {
    Bits in(8);
    for (unsigned i = 0; i < 8; ++i) in[i] = (x >> i) & 1u;
    TapeState t(in);
    p.run(t, 0, stop);
    const unsigned scanned = count_ones(in) - in[2];
    CHECK(2u * t.reg(1) + t.reg(2) == scanned % 4);
  }
}

TEST_CASE("compiled rounds restore the register and the head") {
  std::mt19937_64 rng(21);
  struct Case {
    MachineProgram prog;
    std::size_t n;
  };
  const Case cases[] = {{compile_phase1(10), 10}, {compile_phase2_round(15, 5), 15}, {compile_phase3_round(12, 6), 12}};
  for (const auto& c : cases) {
    for (int i = 0; i < 20; ++i) {
      const Bits in = random_bits(rng, c.n);
      TapeState t(in);
      c.prog.run(t);
      CHECK(t.head() == 0);
      CHECK(t.reg() == std::array<Bit, 2>{0, 0});
    }
  }
}

TEST_CASE("compiled programs are oblivious and invertible") {
  std::mt19937_64 rng(8);
  const MachineProgram p = compile_phase2_round(12, 4);
  std::vector<TraceEntry> ref;
  for (int i = 0; i < 30; ++i) {
    const Bits in = random_bits(rng, 12);
    TapeState t(in);
    std::vector<TraceEntry> trace;
    p.run(t, 0, SIZE_MAX, &trace);
    if (i == 0) ref = trace;
    CHECK(trace == ref);
    CHECK(t.steps() == p.size());
    p.inverse().run(t);
    CHECK(t.cells() == in);
    CHECK(t.reg() == std::array<Bit, 2>{0, 0});
  }
}

TEST_CASE("closed-form costs equal the emitted programs") {
  for (std::size_t n : {2u, 3u, 8u, 17u, 40u}) CHECK(phase1_cost(n) == compile_phase1(n).cost());
  for (std::size_t n : {7u, 21u, 30u}) {
    for (std::size_t k : {2u, 3u, 7u}) {
      if (k <= n) CHECK(phase2_round_cost(n, k) == compile_phase2_round(n, k).cost());
    }
  }
  for (std::size_t n : {10u, 23u, 40u}) {
    for (std::size_t k : {4u, 5u, 10u}) CHECK(phase3_round_cost(n, k) == compile_phase3_round(n, k).cost());
  }
  std::mt19937_64 rng(4);
  for (std::size_t n : {1u, 2u, 9u, 50u}) {
    const Permutation perm = uniform_random_perm(n, rng);
    CHECK(permutation_cost(perm) == compile_permutation(perm).cost());
  }
}

TEST_CASE("compiled permutations move cells to their destinations") {
  std::mt19937_64 rng(6);
  for (std::size_t n : {2u, 5u, 27u}) {
    for (int i = 0; i < 5; ++i) {
      const Permutation perm = uniform_random_perm(n, rng);
      const Bits in = random_bits(rng, n);
      TapeState t(in);
      compile_permutation(perm).run(t);
      CHECK(t.cells() == apply_permutation(std::span<const Bit>(in), std::span<const std::size_t>(perm)));
    }
  }
  CHECK(compile_permutation(identity_permutation(6)).size() == 0);
  CHECK_THROWS_AS(compile_permutation(Permutation{0, 0}), std::invalid_argument);
}

TEST_CASE("round cost grows quadratically in the segment length") {
  double lo = 1e300, hi = 0;
  for (std::size_t n = 8; n <= 512; n *= 2) {
    const double r = static_cast<double>(phase1_cost(n).total()) / (static_cast<double>(n) * n);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(hi < 4.0);
  CHECK(lo > 0.05);
  const double r2 = static_cast<double>(phase2_round_cost(729, 7).total()) / (729.0 * 729.0);
  CHECK(r2 < 4.0);
}

TEST_CASE("equivalence check reports mismatches with a witness") {
  MachineProgram identity;
  identity.add_gate(gates::swap());
  auto same = [](std::span<const Bit> b) { return Bits(b.begin(), b.end()); };
  CHECK(equivalence_check(identity, same, 6).agree());

  // Corrupt the comparison gate of the phase-1 program.
  std::string text = compile_phase1(4).to_text();
  const std::string good = "GATEDEF 0 2 0 3 2 1";
  const auto at = text.find(good);
  REQUIRE(at != std::string::npos);
  text.replace(at, good.size(), "GATEDEF 0 2 0 1 2 3");
  const MachineProgram broken = MachineProgram::from_text(text);
  const auto rep = equivalence_check(broken, [](std::span<const Bit> b) { return phase1_round(b).bits; }, 4);
  CHECK_FALSE(rep.agree());
  REQUIRE(rep.witness);
  CHECK(rep.witness->size() == 4);
  const std::string json = rep.to_json();
  CHECK(json.find("\"mode\":\"exhaustive\"") != std::string::npos);
  CHECK(json.find("\"witness\":\"") != std::string::npos);
  CHECK(equivalence_check(identity, same, 3).to_json() == R"({"mode":"exhaustive","cases":8,"mismatches":0,"witness":null})");
}

TEST_CASE("compiled programs round-trip through trace text") {
  const MachineProgram p = compile_phase3_round(12, 6);
  CHECK(MachineProgram::from_text(p.to_text()) == p);
}

TEST_CASE("invalid round parameters") {
  CHECK_THROWS_AS(compile_phase1(1), std::invalid_argument);
  CHECK_THROWS_AS(compile_phase2_round(2, 3), std::invalid_argument);
  CHECK_THROWS_AS(compile_phase3_round(8, 3), std::invalid_argument);
}
