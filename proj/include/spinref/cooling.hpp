#pragma once

// The three cooling phases on plain bit vectors, block partitioning, the
// final gather and the end-to-end pipeline. Round counts and bin sizes come
// from the analytic recurrences, never from the data.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spinref/analysis.hpp"
#include "spinref/bits.hpp"
#include "spinref/machine.hpp"
#include "spinref/thermal.hpp"

namespace spinref {

struct RoundRecord {
  int phase = 0;
  std::size_t round = 0;
  std::uint64_t n_in = 0, n_out = 0;
  std::uint64_t ones_in = 0, ones_out = 0;
  double bias_emp = 0.0;   // empirical bias of the output
  double bias_pred = 0.0;  // scheduled (analytic) bias of the output
  std::uint64_t steps = 0;
  std::size_t k = 0;       // bin or block size (0 for phase 1)
  std::uint64_t aux_u = 0;  // phase 2: bins holding exactly one 1
  ProgramCost cost;         // summed over blocks
  ProgramCost max_block;    // costliest single block
  std::uint64_t blocks = 1;
};

struct RoundResult {
  Bits bits;
  RoundRecord record;
};

// Phase 1 -------------------------------------------------------------------

struct Phase1Config {
  double target_bias = 0.856;
  std::optional<std::size_t> rounds;  // fixed count instead of the recurrence
};

RoundResult phase1_round(std::span<const Bit> bits);
/// Runs pair rounds until the forward orbit from eps0 reaches the target.
/// Throws if the expected survivor count drops below one bit on the way
/// (unless a fixed round count is configured).
std::vector<RoundRecord> phase1_run(Bits& bits, double eps0, const Phase1Config& config = {});

// Phase 2 -------------------------------------------------------------------

struct Phase2Schedule {
  double alpha = 0.3;          // switch to the endgame once k > n^alpha
  double halt_exponent = 0.3;  // stop when delta <= n^-halt_exponent
  std::size_t max_rounds = 64;
};

/// Bin size for a given ones-fraction: 3, 7, 21 or ceil(delta^-0.4).
std::size_t choose_k(double delta);

/// Parity round over consecutive bins (no shuffle).
RoundResult phase2_bins(std::span<const Bit> bits, std::size_t k);
/// Seeded shuffle followed by phase2_bins.
RoundResult phase2_round(std::span<const Bit> bits, std::size_t k, std::uint64_t seed);
/// Iterates parity rounds from predicted ones-fraction delta0. `n` is the
/// global problem size used for the thresholds. Records are returned and
/// `delta0` is advanced to the scheduled value on exit.
std::vector<RoundRecord> phase2_run(Bits& bits, double& delta0, double n, const Phase2Schedule& schedule,
                                    std::uint64_t seed);

// Phase 3 -------------------------------------------------------------------

/// Mod-4 round over consecutive blocks (no shuffle).
RoundResult phase3_blocks(std::span<const Bit> bits, std::size_t k);
RoundResult phase3_round(std::span<const Bit> bits, std::size_t k, std::uint64_t seed);
std::vector<RoundRecord> phase3_run(Bits& bits, double& delta0, std::uint64_t n, std::uint64_t seed,
                                    std::size_t max_rounds = 64);

// Blocks and gather ----------------------------------------------------------

/// Block length floor(n^(1/3)); the final block may be shorter.
std::vector<Bits> block_partition(std::span<const Bit> bits);
/// Concatenation of the clean segments.
Bits gather(const std::vector<Bits>& segments);
/// Tape permutation moving each block's clean prefix (clean[i] cells at the
/// start of block i) to the front, everything else after it in order.
Permutation gather_permutation(std::span<const std::size_t> block_sizes, std::span<const std::size_t> clean);

// Pipeline -------------------------------------------------------------------

enum class PipelineMode { BinomialDirect, ShuffledBlocks };
enum class InitialPermutation { Auto, None, Uniform, Stride };

struct PipelineConfig {
  BiasModel model;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  PipelineMode mode = PipelineMode::BinomialDirect;
  InitialPermutation initial = InitialPermutation::Auto;
  Phase1Config phase1;
  Phase2Schedule phase2;
  std::size_t phase3_max_rounds = 64;
  bool keep_output = false;
};

struct StageSteps {
  std::uint64_t initial_permutation = 0;
  std::array<std::uint64_t, 3> phases{};
  std::uint64_t gather = 0;
  std::uint64_t total() const { return initial_permutation + phases[0] + phases[1] + phases[2] + gather; }
};

struct PipelineResult {
  std::uint64_t clean_bits = 0;
  std::uint64_t ones_out = 0;
  std::size_t blocks = 0;
  std::size_t block_size = 0;
  std::vector<RoundRecord> records;
  YieldLedger ledger;
  StageSteps steps;
  Bits output;  // filled when keep_output is set
};

PipelineResult pipeline(const PipelineConfig& config);

}  // namespace spinref
