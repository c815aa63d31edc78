#include "spinref/cooling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "spinref/compiler.hpp"

namespace spinref {

namespace {

RoundRecord make_record(int phase, std::span<const Bit> in, std::span<const Bit> out) {
  RoundRecord r;
  r.phase = phase;
  r.n_in = in.size();
  r.n_out = out.size();
  r.ones_in = count_ones(in);
  r.ones_out = count_ones(out);
  r.bias_emp = empirical_bias(out);
  return r;
}

void set_cost(RoundRecord& r, const ProgramCost& c) {
  r.cost = c;
  r.max_block = c;
  r.steps = c.total();
}

}  // namespace

// Phase 1 -------------------------------------------------------------------

RoundResult phase1_round(std::span<const Bit> bits) {
  RoundResult res;
  res.bits.reserve(bits.size() / 2);
  for (std::size_t i = 0; i + 1 < bits.size(); i += 2) {
    if (bits[i] == bits[i + 1]) res.bits.push_back(bits[i + 1]);
  }
  res.record = make_record(1, bits, res.bits);
  set_cost(res.record, phase1_cost(bits.size()));
  return res;
}

namespace {

std::vector<double> phase1_run_check(std::size_t size, double eps0, const Phase1Config& config) {
  if (!(config.target_bias > 0.0 && config.target_bias < 1.0)) {
    throw std::invalid_argument("target bias must lie in (0, 1)");
  }
  std::vector<double> orbit;
  if (config.rounds) {
    orbit.push_back(eps0);
    for (std::size_t i = 0; i < *config.rounds; ++i) orbit.push_back(bias_forward(orbit.back()));
    return orbit;
  }
  orbit = forward_orbit(eps0, config.target_bias);
  double expected = static_cast<double>(size);
  for (std::size_t i = 0; i + 1 < orbit.size(); ++i) {
    expected *= phase1_survival(orbit[i]);
    if (expected < 1.0) {
      throw std::invalid_argument("phase 1: " + std::to_string(size) + " bits are too few to reach the target bias");
    }
  }
  return orbit;
}

}  // namespace

std::vector<RoundRecord> phase1_run(Bits& bits, double eps0, const Phase1Config& config) {
  const std::vector<double> orbit = phase1_run_check(bits.size(), eps0, config);
  std::vector<RoundRecord> records;
  for (std::size_t i = 0; i + 1 < orbit.size(); ++i) {
    RoundResult r = phase1_round(bits);
    r.record.round = i + 1;
    r.record.bias_pred = orbit[i + 1];
    records.push_back(r.record);
    bits = std::move(r.bits);
  }
  return records;
}

// Phase 2 -------------------------------------------------------------------

std::size_t choose_k(double delta) {
  if (!(delta > 0.0 && delta <= 0.072)) throw std::invalid_argument("choose_k: delta must lie in (0, 0.072]");
  if (delta > 0.0188) return 3;
  if (delta > 0.0027) return 7;
  if (delta > 0.000158) return 21;
  const double x = std::pow(delta, -0.4);
  // Guard against pow landing a hair above an exact integer.
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * x));
}

RoundResult phase2_bins(std::span<const Bit> bits, std::size_t k) {
  if (k < 2) throw std::invalid_argument("phase 2: bin size must be at least 2");
  RoundResult res;
  std::uint64_t u = 0;
  for (std::size_t b = 0; b + k <= bits.size(); b += k) {
    unsigned parity = 0, ones = 0;
    for (std::size_t j = 0; j < k; ++j) {
      parity ^= bits[b + j];
      ones += bits[b + j];
    }
    if (ones == 1) ++u;
    if (parity == 0) res.bits.insert(res.bits.end(), bits.begin() + b + 1, bits.begin() + b + k);
  }
  res.record = make_record(2, bits, res.bits);
  res.record.k = k;
  res.record.aux_u = u;
  set_cost(res.record, phase2_round_cost(bits.size(), k));
  return res;
}

namespace {

RoundResult shuffled(std::span<const Bit> bits, std::uint64_t seed, auto&& round) {
  const Permutation perm = uniform_random_perm(bits.size(), seed);
  const Bits mixed = apply_permutation(bits, std::span<const std::size_t>(perm));
  RoundResult res = round(std::span<const Bit>(mixed));
  ProgramCost c = permutation_cost(perm);
  c += res.record.cost;
  set_cost(res.record, c);
  return res;
}

}  // namespace

RoundResult phase2_round(std::span<const Bit> bits, std::size_t k, std::uint64_t seed) {
  return shuffled(bits, seed, [k](std::span<const Bit> b) { return phase2_bins(b, k); });
}

std::vector<RoundRecord> phase2_run(Bits& bits, double& delta, double n, const Phase2Schedule& schedule,
                                    std::uint64_t seed) {
  if (!(schedule.alpha > 0.0 && schedule.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(delta >= 0.0 && delta <= 0.072 + 1e-12)) {
    throw std::invalid_argument("phase 2 needs an input bias of at least 0.856");
  }
  const double halt = std::pow(n, -schedule.halt_exponent);
  const double k_limit = std::pow(n, schedule.alpha);
  const std::size_t endgame_k = std::max<std::size_t>(2, integer_root(static_cast<std::uint64_t>(n), 3));
  std::vector<RoundRecord> records;
  for (std::size_t round = 1; round <= schedule.max_rounds; ++round) {
    if (delta <= halt) break;
    std::size_t k = choose_k(std::min(delta, 0.072));
    if (static_cast<double>(k) > k_limit || k > bits.size()) k = std::min(endgame_k, bits.size());
    if (k < 2) break;
    const double next = phase2_delta_next(delta, k);
    if (!(next < delta)) break;
    RoundResult r = phase2_round(bits, k, derive_seed(seed, {2, round}));
    r.record.round = round;
    r.record.bias_pred = bias_from_delta(next);
    records.push_back(r.record);
    bits = std::move(r.bits);
    delta = next;
  }
  return records;
}

// Phase 3 -------------------------------------------------------------------

RoundResult phase3_blocks(std::span<const Bit> bits, std::size_t k) {
  if (k < 4) throw std::invalid_argument("phase 3: block size must be at least 4");
  RoundResult res;
  for (std::size_t b = 0; b + k <= bits.size(); b += k) {
    unsigned ones = 0;
    for (std::size_t j = 0; j < k; ++j) ones += bits[b + j];
    if (ones % 4 == 0) res.bits.insert(res.bits.end(), bits.begin() + b + 3, bits.begin() + b + k);
  }
  res.record = make_record(3, bits, res.bits);
  res.record.k = k;
  set_cost(res.record, phase3_round_cost(bits.size(), k));
  return res;
}

RoundResult phase3_round(std::span<const Bit> bits, std::size_t k, std::uint64_t seed) {
  return shuffled(bits, seed, [k](std::span<const Bit> b) { return phase3_blocks(b, k); });
}

std::vector<RoundRecord> phase3_run(Bits& bits, double& delta, std::uint64_t n, std::uint64_t seed,
                                    std::size_t max_rounds) {
  const double goal = std::pow(static_cast<double>(n), -10.0);
  const std::size_t k_full = phase3_block_size(n);
  std::vector<RoundRecord> records;
  for (std::size_t round = 1; round <= max_rounds; ++round) {
    if (delta < goal) break;
    const std::size_t k = std::min(k_full, bits.size());
    if (k < 4) break;
    const double next = phase3_delta_next(delta, k);
    RoundResult r = phase3_round(bits, k, derive_seed(seed, {3, round}));
    r.record.round = round;
    r.record.bias_pred = bias_from_delta(next);
    records.push_back(r.record);
    bits = std::move(r.bits);
    delta = next;
  }
  return records;
}

// Blocks and gather ----------------------------------------------------------

std::vector<Bits> block_partition(std::span<const Bit> bits) {
  std::vector<Bits> blocks;
  if (bits.empty()) return blocks;
  const std::size_t m = std::max<std::size_t>(1, integer_root(bits.size(), 3));
  for (std::size_t i = 0; i < bits.size(); i += m) {
    const std::size_t end = std::min(bits.size(), i + m);
    blocks.emplace_back(bits.begin() + i, bits.begin() + end);
  }
  return blocks;
}

Bits gather(const std::vector<Bits>& segments) {
  Bits out;
  for (const auto& s : segments) out.insert(out.end(), s.begin(), s.end());
  return out;
}

Permutation gather_permutation(std::span<const std::size_t> block_sizes, std::span<const std::size_t> clean) {
  if (block_sizes.size() != clean.size()) throw std::invalid_argument("gather: size mismatch");
  std::size_t total = 0, kept = 0;
  for (std::size_t i = 0; i < block_sizes.size(); ++i) {
    if (clean[i] > block_sizes[i]) throw std::invalid_argument("gather: clean segment longer than block");
    total += block_sizes[i];
    kept += clean[i];
  }
  Permutation perm(total);
  std::size_t front = 0, back = kept, pos = 0;
  for (std::size_t i = 0; i < block_sizes.size(); ++i) {
    for (std::size_t j = 0; j < block_sizes[i]; ++j, ++pos) perm[pos] = j < clean[i] ? front++ : back++;
  }
  return perm;
}

// Pipeline -------------------------------------------------------------------

namespace {

void merge_records(std::map<std::pair<int, std::size_t>, RoundRecord>& acc, const std::vector<RoundRecord>& recs) {
  for (const auto& r : recs) {
    auto [it, fresh] = acc.try_emplace({r.phase, r.round}, r);
    if (fresh) continue;
    RoundRecord& a = it->second;
    a.n_in += r.n_in;
    a.n_out += r.n_out;
    a.ones_in += r.ones_in;
    a.ones_out += r.ones_out;
    a.cost += r.cost;
    if (r.max_block.total() > a.max_block.total()) a.max_block = r.max_block;
    a.steps += r.steps;
    a.aux_u += r.aux_u;
    a.blocks += r.blocks;
  }
}

}  // namespace

PipelineResult pipeline(const PipelineConfig& config) {
  config.model.validate();
  if (config.n < 2) throw std::invalid_argument("pipeline needs n >= 2");
  const double n = static_cast<double>(config.n);
  PipelineResult result;

  Bits bits = sample(config.model, config.n, config.seed);

  InitialPermutation init = config.initial;
  if (init == InitialPermutation::Auto) {
    if (config.mode == PipelineMode::BinomialDirect) {
      init = InitialPermutation::None;
    } else {
      init = is_perfect_cube(config.n) ? InitialPermutation::Stride : InitialPermutation::Uniform;
    }
  }
  if (init != InitialPermutation::None) {
    const Permutation perm = init == InitialPermutation::Stride
                                 ? stride_shuffle_perm(config.n)
                                 : uniform_random_perm(config.n, derive_seed(config.seed, {0x1A17u}));
    bits = apply_permutation(std::span<const Bit>(bits), std::span<const std::size_t>(perm));
    result.steps.initial_permutation = permutation_cost(perm).total();
  }

  std::vector<Bits> blocks;
  if (config.mode == PipelineMode::BinomialDirect) {
    blocks.push_back(std::move(bits));
  } else {
    blocks = block_partition(bits);
  }
  result.blocks = blocks.size();
  result.block_size = blocks.front().size();

  // Feasibility is judged on the whole input; a single short block may empty out.
  Phase1Config p1 = config.phase1;
  if (blocks.size() > 1 && !p1.rounds) {
    phase1_run_check(config.n, config.model.epsilon, p1);
    p1.rounds = phase1_rounds(config.model.epsilon, p1.target_bias);
  }

  std::map<std::pair<int, std::size_t>, RoundRecord> acc;
  std::vector<std::size_t> sizes, clean;
  std::uint64_t phase1_in = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Bits& blk = blocks[b];
    sizes.push_back(blk.size());
    phase1_in += blk.size();
    const std::uint64_t block_seed = derive_seed(config.seed, {0xB10Cu, b});
    merge_records(acc, phase1_run(blk, config.model.epsilon, p1));
    double eps = config.model.epsilon;
    if (p1.rounds) {
      for (std::size_t i = 0; i < *p1.rounds; ++i) eps = bias_forward(eps);
    } else {
      eps = forward_orbit(eps, p1.target_bias).back();
    }
    double delta = delta_from_bias(eps);
    merge_records(acc, phase2_run(blk, delta, n, config.phase2, block_seed));
    merge_records(acc, phase3_run(blk, delta, config.n, block_seed, config.phase3_max_rounds));
    clean.push_back(blk.size());
  }

  for (auto& [key, r] : acc) {
    r.bias_emp = r.n_out ? 1.0 - 2.0 * static_cast<double>(r.ones_out) / static_cast<double>(r.n_out)
                         : std::numeric_limits<double>::quiet_NaN();
    result.steps.phases[static_cast<std::size_t>(r.phase - 1)] += r.steps;
    result.records.push_back(r);
  }

  if (blocks.size() > 1) result.steps.gather = permutation_cost(gather_permutation(sizes, clean)).total();
  Bits out = gather(blocks);
  result.clean_bits = out.size();
  result.ones_out = count_ones(out);
  if (config.keep_output) result.output = std::move(out);

  result.ledger = yield_ledger(std::max(config.model.epsilon, 1e-300), n, result.clean_bits);
  result.ledger.empirical.emplace_back("partition", n / static_cast<double>(phase1_in));
  for (int phase = 1; phase <= 3; ++phase) {
    std::uint64_t in = 0, out_n = 0;
    bool seen = false;
    for (const auto& r : result.records) {
      if (r.phase != phase) continue;
      if (!seen) in = r.n_in;
      out_n = r.n_out;
      seen = true;
    }
    double f = 1.0;
    if (seen) f = out_n ? static_cast<double>(in) / static_cast<double>(out_n) : INFINITY;
    result.ledger.empirical.emplace_back("phase" + std::to_string(phase), f);
  }
  return result;
}

}  // namespace spinref
