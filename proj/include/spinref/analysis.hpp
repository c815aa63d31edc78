#pragma once

// Closed-form recurrences, bounds and constants of the cooling procedure.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spinref {

struct PolarizationParams {
  double mu = 1e-23;  // erg/G
  double B0 = 1e5;    // G
  double T = 300.0;   // K
  double kB = 1e-16;  // erg/K, rounded as in the standard estimate
};

/// mu * B0 / (kB * T).
double epsilon_thermal(const PolarizationParams& p);

// Phase 1 -------------------------------------------------------------------

/// 2e / (1 + e^2): bias of the survivors of one pair round.
double bias_forward(double eps);
/// Inverse of bias_forward on (0, 1].
double bias_backward(double eps_next);

/// eps0, f(eps0), ... up to and including the first term >= target.
/// Throws if eps0 <= 0 and target > eps0.
std::vector<double> forward_orbit(double eps0, double target);
/// target, b(target), ..., `steps` backward iterates (steps + 1 values).
std::vector<double> backward_orbit(double target, std::size_t steps);

/// Rounds needed to lift eps0 to at least target.
std::size_t phase1_rounds(double eps0, double target);
/// Product of (1 + e_j^2) over the orbit terms that enter a round.
double phase1_overhead(double eps0, double target);
/// Squared product of (1 + e^2) over the backward orbit from target down to
/// and including the first term below `floor`.
double phase1_tail_product(double target = 0.856, double floor = 0.01);
/// exp(x^2 * 2 / (1 - r)): the bound for rounds with eps <= x where
/// consecutive terms shrink by at least r going backwards.
double phase1_low_region_bound(double x = 0.02, double r = 0.5004);
/// Expected fraction of bits kept by one pair round: (1 + e^2) / 4.
double phase1_survival(double eps);

// Phase 2 -------------------------------------------------------------------

struct Phase2Bounds {
  double n1_lower;    // (n0/k)(1-d)^k (k-1)
  double b1_upper;    // b0 (1 - (1-d)^(k-1))
  double u_expected;  // b0 (1-d)^(k-1): bins holding exactly one 1
  double delta1;      // b1_upper / n1_lower
};
Phase2Bounds phase2_bounds(double n0, double b0, std::size_t k);
/// Predicted ones-fraction after a parity round with bin size k.
double phase2_delta_next(double delta, std::size_t k);
/// Predicted kept fraction n1/n0 = (1-d)^k (k-1)/k.
double phase2_keep_fraction(double delta, std::size_t k);

/// Region floors as published: 1 -> 0.532, 2 -> 0.75, 3 -> 0.899, 4 -> 0.96.
double phase2_region_floor(int region);
/// Worst n1/n0 over region 1..3 (grid minimum), or the cumulative product
/// exp(-1.1 sum d^0.4) along the 1.2 d^1.6 chain for region 4.
double phase2_region_worst(int region);

struct Phase2Stationary {
  double delta_star;  // n^(-1/3)
  double halt;        // n^(-0.3)
};
Phase2Stationary phase2_stationary(double n);

// Phase 3 -------------------------------------------------------------------

/// Block size n^(1/6), at least 4.
std::size_t phase3_block_size(std::uint64_t n);
/// d0 (3 k^-1 + 3 d0 + C(k,3) d0^3) with k = floor(n^(1/6)).
double phase3_recurrence(double delta0, std::uint64_t n);
/// Probability that a block of k passes (ones count = 0 mod 4).
double phase3_pass_probability(double delta, std::size_t k);
/// Expected ones-fraction among passed bits under the mod-4 rule.
double phase3_delta_next(double delta, std::size_t k);
/// Expected fraction of input bits passed: P(pass) (k-3)/k.
double phase3_keep_fraction(double delta, std::size_t k);

struct Phase3Certificate {
  std::vector<double> deltas;  // starting value first
  std::size_t iterations = 0;
  bool reached = false;        // deltas.back() < n^-10 within the cap
  double first_loss_factor = 0.0;
  double required_loss_factor = 0.0;  // 1 - 4 n^(-1/6)
};
Phase3Certificate phase3_certify(std::uint64_t n, std::size_t max_iterations = 1000);

// Yield ---------------------------------------------------------------------

double binary_entropy(double p);
/// n (1 - H2((1 + eps) / 2)).
double entropy_cap(double n, double eps);

struct YieldLedger {
  std::vector<std::pair<std::string, double>> factors;
  double constant_product = 0.0;
  double epsilon = 0.0;
  double n = 0.0;
  std::uint64_t clean_bits = 0;
  double total_factor = 0.0;  // constant_product * eps^-2
  double floor = 0.0;         // n / total_factor
  double entropy_cap = 0.0;
  double c = 0.0;             // 1 / constant_product
  std::vector<std::pair<std::string, double>> empirical;  // per-phase n_in / n_out

  bool within_twenty() const { return constant_product <= 20.0; }
  bool meets_floor() const { return static_cast<double>(clean_bits) >= floor; }
  bool within_cap() const { return static_cast<double>(clean_bits) <= entropy_cap; }
  double empirical_product() const;
  std::string to_json() const;
};
YieldLedger yield_ledger(double eps, double n, std::uint64_t clean_bits);

/// Least-squares slope of log(steps) against log(n); needs at least 4 points.
double runtime_exponent(const std::vector<double>& sizes, const std::vector<double>& steps);

/// "i,<name>" CSV of an orbit.
std::string orbit_csv(const std::vector<double>& values, const std::string& name);

}  // namespace spinref
