#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinref/compiler.hpp"
#include "spinref/cooling.hpp"

using namespace spinref;

namespace {

Bits pattern_bits(unsigned x, std::size_t k) {
  Bits b(k);
  for (std::size_t i = 0; i < k; ++i) b[i] = (x >> i) & 1u;
  return b;
}

}  // namespace

TEST_CASE("phase-1 round") {
  CHECK(phase1_round(Bits{0, 0, 0, 1, 1, 0, 1, 1}).bits == Bits{0, 1});
  CHECK(phase1_round(Bits(10, 0)).bits == Bits(5, 0));
  CHECK(phase1_round(Bits{1, 1, 0}).bits == Bits{1});
  const auto r = phase1_round(Bits{0, 0, 0, 1, 1, 0, 1, 1});
  CHECK(r.record.n_in == 8);
  CHECK(r.record.n_out == 2);
  CHECK(r.record.ones_in == 4);
  CHECK(r.record.ones_out == 1);
  CHECK(r.record.steps == phase1_cost(8).total());
}

TEST_CASE("phase-1 conservation") {
  const Bits in = sample({ModelKind::Binomial, 0.3}, 10001, 4);
  std::size_t unequal = 0;
  for (std::size_t i = 0; i + 1 < in.size(); i += 2) unequal += in[i] != in[i + 1];
  const auto r = phase1_round(in);
  // each kept bit consumed its partner, unequal pairs go whole, the odd bit goes
  CHECK(2 * r.bits.size() + 2 * unequal + 1 == in.size());
}

TEST_CASE("phase-1 survivor bias at eps = 0.5") {
  const Bits in = sample({ModelKind::Binomial, 0.5}, 1000000, 12);
  const auto r = phase1_round(in);
  const double m = static_cast<double>(r.bits.size());
  const double p1 = 0.1;  // (1 - 0.8) / 2
  const double sigma_bias = 2 * std::sqrt(p1 * (1 - p1) / m);
  CHECK(std::abs(r.record.bias_emp - 0.8) < 3 * sigma_bias);
  const double keep = 1e6 / 2 * (1 + 0.25) / 2;
  CHECK(std::abs(m - keep) < 3 * std::sqrt(5e5 * 0.625 * 0.375));
}

TEST_CASE("phase-1 run") {
  Bits b = sample({ModelKind::Binomial, 0.857}, 100, 1);
  const Bits copy = b;
  CHECK(phase1_run(b, 0.857).empty());
  CHECK(b == copy);

  Bits tiny = sample({ModelKind::Binomial, 0.01}, 1000, 1);
  CHECK_THROWS_AS(phase1_run(tiny, 0.01), std::invalid_argument);
  Phase1Config fixed;
  fixed.rounds = 3;
  CHECK(phase1_run(tiny, 0.01, fixed).size() == 3);

  int reached = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Bits x = sample({ModelKind::Binomial, 0.2}, 1000000, seed);
    const auto recs = phase1_run(x, 0.2);
    CHECK(recs.size() == phase1_rounds(0.2, 0.856));
    reached += recs.back().bias_emp >= 0.856;
  }
  CHECK(reached >= 99);
}

TEST_CASE("phase-2 bins") {
  CHECK(phase2_bins(Bits{0, 0, 0}, 3).bits == Bits{0, 0});
  CHECK(phase2_bins(Bits{0, 1, 0}, 3).bits.empty());
  CHECK(phase2_bins(Bits{1, 1, 0}, 3).bits == Bits{1, 0});
  CHECK(phase2_bins(Bits{0, 0, 0, 0}, 3).bits == Bits{0, 0});
  const auto r = phase2_bins(Bits{1, 0, 0, 0, 1, 1, 0, 0, 0}, 3);
  CHECK(r.record.aux_u == 1);
}

TEST_CASE("phase-2 leakage: a 1 survives only from an even, non-empty bin") {
  for (std::size_t k = 2; k <= 12; ++k) {
    for (unsigned x = 0; x < (1u << k); ++x) {
      const Bits bin = pattern_bits(x, k);
      const auto out = phase2_bins(bin, k).bits;
      const std::size_t c = count_ones(bin);
      CHECK((count_ones(out) > 0) == (c % 2 == 0 && c > 0));
      CHECK(out.size() == (c % 2 == 0 ? k - 1 : 0));
    }
  }
}

TEST_CASE("choose_k schedule") {
  CHECK(choose_k(0.05) == 3);
  CHECK(choose_k(0.001) == 21);
  CHECK(choose_k(1e-5) == 100);
  CHECK(choose_k(0.072) == 3);
  CHECK(choose_k(0.0188) == 7);
  CHECK(choose_k(0.0027) == 21);
  CHECK(choose_k(0.000158) == 34);
  for (double d = 0.000158; d > 1e-12; d /= 1.3) CHECK(choose_k(d) >= 33);
  CHECK_THROWS_AS(choose_k(0.08), std::invalid_argument);
  CHECK_THROWS_AS(choose_k(0.0), std::invalid_argument);
}

TEST_CASE("phase-2 run") {
  Bits clean(1000, 0);
  double d = 0.0;
  CHECK(phase2_run(clean, d, 1e6, {}, 1).empty());

  Bits b = sample({ModelKind::Binomial, 0.9}, 200000, 3);
  double delta = 0.05;
  const auto recs = phase2_run(b, delta, 1e6, {}, 3);
  REQUIRE_FALSE(recs.empty());
  CHECK(recs.front().k == 3);
  CHECK(delta <= std::pow(1e6, -0.3));
  CHECK(recs.size() <= 6);
  for (const auto& r : recs) CHECK(r.n_out <= r.n_in);

  Bits again = sample({ModelKind::Binomial, 0.9}, 200000, 3);
  double delta2 = 0.05;
  const auto recs2 = phase2_run(again, delta2, 1e6, {}, 3);
  CHECK(again == b);
  CHECK(recs2.size() == recs.size());
}

TEST_CASE("phase-2 fourth region contraction") {
  const std::size_t n = 4000000;
  const double d0 = 1.5e-4;
  Bits b(n, 0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(d0 * n); ++i) b[i * 6661 % n] = 1;
  const std::size_t k = choose_k(d0);
  CHECK(k == 34);
  const auto r = phase2_round(b, k, 5);
  const double bound = 1.2 * std::pow(d0, 1.6) * static_cast<double>(r.record.n_out);
  CHECK(static_cast<double>(r.record.ones_out) <= bound + 3 * std::sqrt(bound));
  CHECK(phase2_delta_next(d0, k) <= 1.2 * std::pow(d0, 1.6));
}

TEST_CASE("phase-3 blocks") {
  CHECK(phase3_blocks(Bits(10, 0), 10).bits == Bits(7, 0));
  Bits one(10, 0);
  one[5] = 1;
  CHECK(phase3_blocks(one, 10).bits.empty());
  Bits four(10, 0);
  four[3] = four[5] = four[7] = four[9] = 1;
  CHECK(count_ones(phase3_blocks(four, 10).bits) == 4);
}

TEST_CASE("phase-3 pass predicate is count mod 4") {
  for (std::size_t k = 4; k <= 16; ++k) {
    for (unsigned x = 0; x < (1u << k); ++x) {
      const Bits blk = pattern_bits(x, k);
      const auto out = phase3_blocks(blk, k).bits;
      const bool pass = count_ones(blk) % 4 == 0;
      CHECK(out.size() == (pass ? k - 3 : 0));
      if (pass) CHECK(std::equal(out.begin(), out.end(), blk.begin() + 3));
    }
  }
}

TEST_CASE("phase-3 run") {
  Bits zeros(1000000, 0);
  double d = std::pow(1e6, -0.3);
  const auto recs = phase3_run(zeros, d, 1000000, 1);
  REQUIRE_FALSE(recs.empty());
  CHECK(recs.size() <= 6);
  CHECK(count_ones(zeros) == 0);
  CHECK(recs.front().n_out == 1000000 / 10 * 7);
  CHECK(d < 1e-60);

  Bits b = sample({ModelKind::Binomial, 1 - 2 * 0.0158}, 1000000, 2);
  double delta = 0.0158;
  const auto r2 = phase3_run(b, delta, 1000000, 2);
  CHECK(count_ones(b) == 0);
  CHECK(r2.size() == 3);
}

TEST_CASE("block partition") {
  const Bits b = sample({ModelKind::Binomial, 0.1}, 27, 1);
  const auto blocks = block_partition(b);
  CHECK(blocks.size() == 9);
  for (const auto& x : blocks) CHECK(x.size() == 3);
  CHECK(gather(blocks) == b);
  CHECK(block_partition(Bits(8, 0)).size() == 4);
  const auto odd = block_partition(Bits(30, 0));
  CHECK(odd.size() == 10);
  CHECK(block_partition(Bits(29, 1)).back().size() == 2);
}

TEST_CASE("gather") {
  CHECK(gather({Bits{0, 1, 1}}) == Bits{0, 1, 1});
  CHECK(gather({Bits{0, 0}, Bits{0}}) == Bits{0, 0, 0});
  const std::size_t sizes[] = {3, 3, 3};
  const std::size_t clean[] = {1, 0, 2};
  const Permutation p = gather_permutation(sizes, clean);
  CHECK(p == Permutation{0, 3, 4, 5, 6, 7, 1, 2, 8});
  double worst = 0;
  for (std::size_t n : {27u, 64u, 216u, 729u}) {
    const std::size_t m = integer_root(n, 3);
    std::vector<std::size_t> sz(n / m, m), cl;
    for (std::size_t i = 0; i < sz.size(); ++i) cl.push_back(i % m);
    const Permutation g = gather_permutation(sz, cl);
    const double steps = static_cast<double>(compile_permutation(g).size());
    worst = std::max(worst, steps / (static_cast<double>(n) * n));
  }
  CHECK(worst < 1.0);
}

TEST_CASE("stride shuffle decorrelates markov input into binomial-like windows") {
  // Ones-count histogram of aligned 8-bit windows inside each block against
  // Binomial(8, p) at the empirical marginal p. One seed at n = 1e6 carries
  // about 0.005 of sampling noise in L1, so the check averages five seeds.
  const std::size_t n = 1000000;
  const BiasModel m{ModelKind::MarkovCorrelated, 0.25, 10.0};
  auto l1 = [&](const Bits& b) {
    std::vector<double> hist(9, 0.0);
    std::size_t windows = 0;
    for (std::size_t blk = 0; blk + 100 <= n; blk += 100) {
      for (std::size_t w = blk; w + 8 <= blk + 100; w += 8, ++windows) {
        hist[count_ones(std::span<const Bit>(b).subspan(w, 8))] += 1;
      }
    }
    const double p = static_cast<double>(count_ones(b)) / static_cast<double>(n);
    double dist = 0, c = 1;
    for (int j = 0; j <= 8; ++j) {
      if (j > 0) c = c * (9 - j) / j;
      dist += std::abs(hist[j] / static_cast<double>(windows) - c * std::pow(p, j) * std::pow(1 - p, 8 - j));
    }
    return dist;
  };
  const Permutation s = stride_shuffle_perm(n);
  double mean = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Bits raw = sample(m, n, seed);
    mean += l1(apply_permutation(std::span<const Bit>(raw), std::span<const std::size_t>(s))) / 5;
    if (seed == 1) CHECK(l1(raw) > 0.1);
  }
  CHECK(mean < 0.01);
}

TEST_CASE("pipeline at eps = 1") {
  PipelineConfig c;
  c.model = {ModelKind::Binomial, 1.0};
  c.n = 1000;
  c.keep_output = true;
  const auto r = pipeline(c);
  CHECK(r.records.empty());
  CHECK(r.clean_bits == 1000);
  CHECK(r.output == Bits(1000, 0));
  CHECK(r.ledger.entropy_cap == doctest::Approx(1000));
}

TEST_CASE("pipeline at eps = 0.25, n = 1e6") {
  PipelineConfig c;
  c.model = {ModelKind::Binomial, 0.25};
  c.n = 1000000;
  c.seed = 7;
  const auto r = pipeline(c);
  CHECK(r.clean_bits >= 3125);
  CHECK(r.ones_out == 0);
  CHECK(r.ledger.meets_floor());
  CHECK(r.ledger.within_cap());
  // per-phase factors telescope to n / clean
  CHECK(r.ledger.empirical_product() == doctest::Approx(1e6 / static_cast<double>(r.clean_bits)).epsilon(0.05));
  for (const auto& rec : r.records) {
    const double in = static_cast<double>(rec.ones_in) / static_cast<double>(rec.n_in);
    const double out = static_cast<double>(rec.ones_out) / static_cast<double>(rec.n_out);
    CHECK(out <= in + 3 * std::sqrt(in * (1 - in) / static_cast<double>(rec.n_out)));
  }
}

TEST_CASE("pipeline determinism and block mode") {
  PipelineConfig c;
  c.model = {ModelKind::Binomial, 0.5};
  c.n = 19683;
  c.seed = 2;
  c.mode = PipelineMode::ShuffledBlocks;
  const auto a = pipeline(c);
  const auto b = pipeline(c);
  CHECK(a.clean_bits == b.clean_bits);
  CHECK(a.steps.total() == b.steps.total());
  CHECK(a.records.size() == b.records.size());
  CHECK(a.blocks == 729);
  CHECK(a.block_size == 27);
  CHECK(a.steps.initial_permutation > 0);
  CHECK(a.steps.gather > 0);
  CHECK(a.ones_out <= a.clean_bits);

  c.mode = PipelineMode::BinomialDirect;
  const auto d = pipeline(c);
  CHECK(d.steps.initial_permutation == 0);
  CHECK(d.steps.gather == 0);
  CHECK(d.blocks == 1);
}
