#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "spinref/polymer.hpp"
#include "spinref/thermal.hpp"

using namespace spinref;

namespace {

Permutation power(const Permutation& p, std::size_t times) {
  Permutation out = identity_permutation(p.size());
  for (std::size_t i = 0; i < times; ++i) out = compose(out, p);
  return out;
}

}  // namespace

TEST_CASE("trivial sequences") {
  const PolymerSpec s = abc_spec(4);
  CHECK(induced_permutation(s, PulseSequence{}) == identity_permutation(12));
  PulseSequence twice;
  twice.pulses = {PairPulse{'A', 'B'}, PairPulse{'A', 'B'}};
  CHECK(induced_permutation(s, twice) == identity_permutation(12));
}

TEST_CASE("ABC sequence track map") {
  const PolymerSpec two = abc_spec(2);
  const Permutation p = induced_permutation(two, abc_rotate_seq());
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(p[two.position('A', i)] == two.position('C', i));
    CHECK(p[two.position('B', i)] == two.position('B', i + 1));
    CHECK(p[two.position('C', i)] == two.position('A', i + 1));
  }
  // For longer rings the B contents step backwards one period.
  for (std::size_t periods : {3u, 5u, 11u}) {
    const PolymerSpec s = abc_spec(periods);
    const Permutation q = induced_permutation(s, abc_rotate_seq());
    for (std::size_t i = 0; i < periods; ++i) {
      CHECK(q[s.position('A', i)] == s.position('C', i));
      CHECK(q[s.position('B', i)] == s.position('B', i + periods - 1));
      CHECK(q[s.position('C', i)] == s.position('A', i + 1));
    }
    // Two tracks: the AC ring and the B ring.
    CHECK(track_decomposition(q).size() == 2);
  }
}

TEST_CASE("track decomposition") {
  CHECK(track_decomposition(identity_permutation(5)).size() == 5);
  Permutation rot(6);
  for (std::size_t i = 0; i < 6; ++i) rot[i] = (i + 1) % 6;
  const auto cycles = track_decomposition(rot);
  REQUIRE(cycles.size() == 1);
  CHECK(cycles[0] == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS(track_decomposition(Permutation{0, 0}));
}

TEST_CASE("two-tape rotation") {
  const PulseSequence seq = two_tape_rotate_seq();
  CHECK(seq.pulses.size() == 6);
  for (std::size_t periods = 2; periods <= 100; ++periods) {
    const PolymerSpec s = abcd_spec(periods);
    const Permutation p = induced_permutation(s, seq);
    bool ok = true;
    for (std::size_t i = 0; i < periods; ++i) {
      ok = ok && p[s.position('B', i)] == s.position('B', i) && p[s.position('D', i)] == s.position('D', i) &&
           p[s.position('A', i)] == s.position('A', i + 1) &&
           p[s.position('C', i)] == s.position('C', i + periods - 1);
    }
    CHECK(ok);
    CHECK(power(p, periods) == identity_permutation(s.size()));
  }
  const PolymerSpec two = abcd_spec(2);
  const auto tracks = track_decomposition(induced_permutation(two, seq));
  CHECK(tracks.size() == 6);  // A ring, C ring, four fixed points
}

TEST_CASE("pulse layers are involutions and disjoint layers commute") {
  const PolymerSpec s = abcd_spec(5);
  const PulseSequence seq = two_tape_rotate_seq();
  PulseSequence round_trip = seq;
  round_trip.then(seq.reversed());
  CHECK(induced_permutation(s, round_trip) == identity_permutation(s.size()));
  PulseSequence ab_cd, cd_ab;
  ab_cd.pulses = {PairPulse{'A', 'B'}, PairPulse{'C', 'D'}};
  cd_ab.pulses = {PairPulse{'C', 'D'}, PairPulse{'A', 'B'}};
  CHECK(induced_permutation(s, ab_cd) == induced_permutation(s, cd_ab));
}

TEST_CASE("transposition from three CNOT layers") {
  const PulseSequence c = transposition_as_cnots('A', 'B');
  REQUIRE(c.pulses.size() == 3);
  CHECK(c.pulses[0] == Pulse{CnotPulse{'A', 'B'}});
  CHECK(c.pulses[1] == Pulse{CnotPulse{'B', 'A'}});
  CHECK(c.pulses[2] == Pulse{CnotPulse{'A', 'B'}});
  PolymerSpec pair;
  pair.pattern = "AB";
  pair.periods = 1;
  CHECK_THROWS(adjacent_pairs(pair, 'A', 'B'));  // a ring of two touches itself twice
  const PolymerSpec s = abc_spec(3);
  CHECK(apply_pulses(s, c, Bits{0, 1, 0, 0, 0, 0, 0, 0, 0}) == Bits{1, 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK(apply_pulses(s, c, Bits{1, 1, 0, 0, 0, 0, 0, 0, 0}) == Bits{1, 1, 0, 0, 0, 0, 0, 0, 0});
  std::mt19937_64 rng(1);
  PulseSequence swap_layer;
  swap_layer.pulses = {PairPulse{'A', 'B'}};
  for (int i = 0; i < 20; ++i) {
    Bits b(9);
    for (auto& x : b) x = rng() & 1;
    CHECK(apply_pulses(s, c, b) == apply_pulses(s, swap_layer, b));
  }
  CHECK_THROWS_AS(induced_permutation(s, c), std::invalid_argument);
}

TEST_CASE("realized abstract shift") {
  for (std::size_t periods : {1u, 2u, 3u, 7u, 20u}) {
    const PolymerSpec s = abc_spec(periods);
    const RealizedShift r = realize_abstract_shift(s);
    const Permutation p = induced_permutation(s, r.seq);
    CHECK(track_decomposition(p).size() == 1);
    CHECK(power(p, s.size()) == identity_permutation(s.size()));
    for (std::size_t t = 0; t < s.size(); ++t) {
      CHECK(p[r.logical_order[t]] == r.logical_order[(t + 1) % s.size()]);
    }
    // Only the head pulse is local, and it sits on the D pair.
    std::size_t heads = 0;
    for (const Pulse& q : r.seq.pulses) heads += std::holds_alternative<HeadPulse>(q);
    CHECK(heads == 1);
    CHECK(s.type_at(s.d_site) == 'C');
    CHECK(s.type_at((s.d_site + 1) % s.size()) == 'A');
  }
  // Concrete bits follow the logical order.
  const PolymerSpec s = abc_spec(4);
  const RealizedShift r = realize_abstract_shift(s);
  Bits logical(12, 0);
  logical[0] = 1;
  logical[5] = 1;
  Bits ring(12);
  for (std::size_t t = 0; t < 12; ++t) ring[r.logical_order[t]] = logical[t];
  const Bits moved = apply_pulses(s, r.seq, ring);
  for (std::size_t t = 0; t < 12; ++t) CHECK(moved[r.logical_order[(t + 1) % 12]] == logical[t]);
}

TEST_CASE("head gates and validation") {
  PolymerSpec s = abc_spec(3);
  PulseSequence seq;
  seq.pulses.push_back(HeadPulse{seq.add_gate(gates::xor_into_first())});
  CHECK_THROWS_AS(induced_permutation(s, seq), std::invalid_argument);
  Bits b(9, 0);
  b[0] = 1;  // the head pair is (C_2, A_0) = (8, 0)
  CHECK(apply_pulses(s, seq, b)[8] == 1);
  PulseSequence bad;
  bad.pulses = {PairPulse{'A', 'C'}};
  CHECK_NOTHROW(induced_permutation(s, bad));  // C_j and A_j+1 are adjacent
  bad.pulses = {PairPulse{'A', 'D'}};
  CHECK_THROWS(induced_permutation(s, bad));
  s.d_spacing = 2;
  CHECK_THROWS(s.validate());
}

TEST_CASE("cellular-automaton head pulses act at every E site") {
  PolymerSpec s = abc_spec(6);
  s.e_site = s.position('C', 0);
  s.d_spacing = 2;
  PulseSequence seq;
  seq.pulses.push_back(EHeadPulse{seq.add_gate(gates::swap())});
  const Permutation p = induced_permutation(s, seq);
  std::size_t moved = 0;
  for (std::size_t i = 0; i < p.size(); ++i) moved += p[i] != i;
  CHECK(moved == 6);  // three sites, two cells each
  CHECK(p[s.position('C', 0)] == s.position('A', 1));
  CHECK(p[s.position('C', 2)] == s.position('A', 3));
}

TEST_CASE("pulse text round trip") {
  PulseSequence seq = two_tape_rotate_seq();
  seq.pulses.push_back(HeadPulse{seq.add_gate(gates::swap())});
  seq.pulses.push_back(CnotPulse{'A', 'B'});
  seq.pulses.push_back(EHeadPulse{seq.add_gate(gates::xor_into_first())});
  const std::string text = seq.to_text();
  CHECK(text.find("P(A,B)\n") != std::string::npos);
  CHECK(text.find("HEAD 0\n") != std::string::npos);
  CHECK(PulseSequence::from_text(text) == seq);
  CHECK_THROWS_AS(PulseSequence::from_text("P(A,B\n"), std::invalid_argument);
  CHECK_THROWS_AS(PulseSequence::from_text("HEAD 3\n"), std::invalid_argument);
}

TEST_CASE("two-tape and CA stride shuffles") {
  for (std::size_t n : {8u, 27u, 64u, 125u, 1000u}) {
    CHECK(two_tape_stride(n).result == stride_shuffle_perm(n));
    CHECK(ca_stride(n).result == stride_shuffle_perm(n));
  }
  std::vector<double> sizes, two, ca;
  for (std::size_t m : {8u, 11u, 15u, 20u, 27u}) {
    const std::size_t n = m * m * m;
    sizes.push_back(static_cast<double>(n));
    two.push_back(static_cast<double>(two_tape_stride(n).pulses));
    ca.push_back(static_cast<double>(ca_stride(n).pulses));
  }
  CHECK(runtime_exponent(sizes, two) == doctest::Approx(4.0 / 3.0).epsilon(0.05));
  CHECK(runtime_exponent(sizes, ca) == doctest::Approx(2.0 / 3.0).epsilon(0.1));
  CHECK_THROWS(two_tape_stride(10));
}

TEST_CASE("architecture step counts") {
  PipelineConfig c;
  c.model = {ModelKind::Binomial, 0.5};
  c.n = 19683;
  c.mode = PipelineMode::ShuffledBlocks;
  c.initial = InitialPermutation::Stride;
  const PipelineResult run = pipeline(c);
  const auto single = architecture_steps(Architecture::SingleTape, run, c.n);
  const auto two = architecture_steps(Architecture::TwoTape, run, c.n);
  const auto ca = architecture_steps(Architecture::TwoTapeCA, run, c.n);
  CHECK(single.total() == run.steps.total());
  CHECK(two.initial_permutation == two_tape_stride(19683).pulses);
  CHECK(ca.total() < two.total());
  CHECK(ca.gather == 6 * 19683 + 7 * run.clean_bits);
  CHECK(parse_architecture("two_tape_ca") == Architecture::TwoTapeCA);
  CHECK_THROWS(parse_architecture("three_tape"));
}
