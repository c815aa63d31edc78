#include "spinref/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "spinref/bits.hpp"

namespace spinref {

double epsilon_thermal(const PolarizationParams& p) {
  if (!(p.mu > 0 && p.T > 0 && p.kB > 0) || !(p.B0 >= 0)) {
    throw std::invalid_argument("polarization parameters must be positive");
  }
  return p.mu * p.B0 / (p.kB * p.T);
}

double bias_forward(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("bias must lie in [0, 1]");
  return 2.0 * eps / (1.0 + eps * eps);
}

double bias_backward(double e) {
  if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("bias_backward needs a bias in (0, 1]");
  // (1 - sqrt(1 - e^2)) / e, written without cancellation.
  return e / (1.0 + std::sqrt(1.0 - e * e));
}

std::vector<double> forward_orbit(double eps0, double target) {
  std::vector<double> orbit{eps0};
  if (eps0 >= target) return orbit;
  if (!(eps0 > 0.0)) throw std::invalid_argument("zero bias never reaches the target");
  if (target > 1.0) throw std::invalid_argument("target bias above 1");
  while (orbit.back() < target) {
    orbit.push_back(bias_forward(orbit.back()));
    if (orbit.size() > 5000) throw std::runtime_error("forward orbit did not reach the target");
  }
  return orbit;
}

std::vector<double> backward_orbit(double target, std::size_t steps) {
  std::vector<double> orbit{target};
  for (std::size_t i = 0; i < steps; ++i) orbit.push_back(bias_backward(orbit.back()));
  return orbit;
}

std::size_t phase1_rounds(double eps0, double target) { return forward_orbit(eps0, target).size() - 1; }

double phase1_overhead(double eps0, double target) {
  const auto orbit = forward_orbit(eps0, target);
  double prod = 1.0;
  for (std::size_t i = 0; i + 1 < orbit.size(); ++i) prod *= 1.0 + orbit[i] * orbit[i];
  return prod;
}

double phase1_tail_product(double target, double floor) {
  double e = target, prod = 1.0;
  while (true) {
    prod *= 1.0 + e * e;
    if (e < floor) break;
    e = bias_backward(e);
  }
  return prod * prod;
}

double phase1_low_region_bound(double x, double r) { return std::exp(x * x * 2.0 / (1.0 - r)); }

double phase1_survival(double eps) { return (1.0 + eps * eps) / 4.0; }

Phase2Bounds phase2_bounds(double n0, double b0, std::size_t k) {
  if (k < 2) throw std::invalid_argument("bin size must be at least 2");
  if (!(n0 > 0) || b0 < 0 || b0 > n0) throw std::invalid_argument("need 0 <= b0 <= n0, n0 > 0");
  const double d = b0 / n0;
  const double kd = static_cast<double>(k);
  Phase2Bounds out;
  out.n1_lower = n0 / kd * std::pow(1.0 - d, kd) * (kd - 1.0);
  out.u_expected = b0 * std::pow(1.0 - d, kd - 1.0);
  out.b1_upper = b0 - out.u_expected;
  out.delta1 = out.n1_lower > 0 ? out.b1_upper / out.n1_lower : 1.0;
  return out;
}

double phase2_delta_next(double delta, std::size_t k) { return phase2_bounds(1.0, delta, k).delta1; }

double phase2_keep_fraction(double delta, std::size_t k) {
  const double kd = static_cast<double>(k);
  return std::pow(1.0 - delta, kd) * (kd - 1.0) / kd;
}

double phase2_region_floor(int region) {
  switch (region) {
    case 1: return 0.532;
    case 2: return 0.75;
    case 3: return 0.899;
    case 4: return 0.96;
    default: throw std::invalid_argument("phase-2 region must be 1..4");
  }
}

double phase2_region_worst(int region) {
  struct Range {
    double lo, hi;
    std::size_t k;
  };
  static constexpr Range ranges[] = {{0.0188, 0.072, 3}, {0.0027, 0.0188, 7}, {0.000158, 0.0027, 21}};
  if (region >= 1 && region <= 3) {
    const Range& r = ranges[region - 1];
    double worst = 1.0;
    constexpr int grid = 2000;
    for (int i = 1; i <= grid; ++i) {
      double d = r.lo + (r.hi - r.lo) * i / grid;
      worst = std::min(worst, phase2_keep_fraction(d, r.k));
    }
    return worst;
  }
  if (region == 4) {
    double d = 0.000158, sum = 0.0;
    while (d > 1e-300) {
      sum += std::pow(d, 0.4);
      double next = 1.2 * std::pow(d, 1.6);
      if (!(next < d)) break;
      d = next;
    }
    return std::exp(-1.1 * sum);
  }
  throw std::invalid_argument("phase-2 region must be 1..4");
}

Phase2Stationary phase2_stationary(double n) {
  if (!(n >= 2)) throw std::invalid_argument("phase2_stationary needs n >= 2");
  return {std::pow(n, -1.0 / 3.0), std::pow(n, -0.3)};
}

std::size_t phase3_block_size(std::uint64_t n) {
  return std::max<std::size_t>(4, integer_root(n, 6));
}

namespace {
double choose(std::size_t n, std::size_t r) {
  if (r > n) return 0.0;
  double c = 1.0;
  for (std::size_t i = 0; i < r; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return c;
}
}  // namespace

double phase3_recurrence(double delta0, std::uint64_t n) {
  if (n < 64) throw std::invalid_argument("phase3_recurrence needs n >= 64");
  if (!(delta0 >= 0.0 && delta0 < 1.0)) throw std::invalid_argument("delta must lie in [0, 1)");
  const std::size_t k = integer_root(n, 6);
  return delta0 * (3.0 / static_cast<double>(k) + 3.0 * delta0 + choose(k, 3) * delta0 * delta0 * delta0);
}

double phase3_pass_probability(double delta, std::size_t k) {
  double p = 0.0;
  for (std::size_t c = 0; c <= k; c += 4) {
    p += choose(k, c) * std::pow(delta, static_cast<double>(c)) * std::pow(1.0 - delta, static_cast<double>(k - c));
  }
  return p;
}

double phase3_delta_next(double delta, std::size_t k) {
  if (k < 4) throw std::invalid_argument("phase-3 block size must be at least 4");
  // Passed ones per block: E[ones in positions 3..k-1 | c ones] = c (k-3)/k.
  double ones = 0.0;
  for (std::size_t c = 4; c <= k; c += 4) {
    ones += choose(k, c) * std::pow(delta, static_cast<double>(c)) *
            std::pow(1.0 - delta, static_cast<double>(k - c)) * static_cast<double>(c) / static_cast<double>(k);
  }
  return ones / phase3_pass_probability(delta, k);
}

double phase3_keep_fraction(double delta, std::size_t k) {
  return phase3_pass_probability(delta, k) * static_cast<double>(k - 3) / static_cast<double>(k);
}

Phase3Certificate phase3_certify(std::uint64_t n, std::size_t max_iterations) {
  Phase3Certificate cert;
  const double nd = static_cast<double>(n);
  const double goal = std::pow(nd, -10.0);
  const std::size_t k = integer_root(n, 6);
  double d = std::pow(nd, -0.3);
  cert.deltas.push_back(d);
  cert.required_loss_factor = 1.0 - 4.0 * std::pow(nd, -1.0 / 6.0);
  cert.first_loss_factor = phase3_keep_fraction(d, k);
  while (d >= goal && cert.iterations < max_iterations) {
    d = phase3_recurrence(d, n);
    cert.deltas.push_back(d);
    ++cert.iterations;
  }
  cert.reached = d < goal;
  return cert;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double entropy_cap(double n, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  return n * (1.0 - binary_entropy((1.0 + eps) / 2.0));
}

double YieldLedger::empirical_product() const {
  double p = 1.0;
  for (const auto& [name, f] : empirical) p *= f;
  return p;
}

std::string YieldLedger::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json fs = nlohmann::ordered_json::object();
  for (const auto& [name, f] : factors) fs[name] = f;
  j["factors"] = fs;
  j["constant_product"] = constant_product;
  j["epsilon"] = epsilon;
  j["n"] = n;
  j["clean_bits"] = clean_bits;
  j["total_factor"] = total_factor;
  j["floor"] = floor;
  j["entropy_cap"] = entropy_cap;
  j["c"] = c;
  nlohmann::ordered_json em = nlohmann::ordered_json::object();
  for (const auto& [name, f] : empirical) em[name] = f;
  j["empirical_factors"] = em;
  j["empirical_product"] = empirical_product();
  j["meets_floor"] = meets_floor();
  j["within_entropy_cap"] = within_cap();
  return j.dump(2);
}

YieldLedger yield_ledger(double eps, double n, std::uint64_t clean_bits) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  YieldLedger l;
  l.factors = {{"phase1_low_region", 1.0017},    {"phase1_product", 6.7},
               {"phase2_region1", 1.0 / 0.532}, {"phase2_region2", 1.0 / 0.75},
               {"phase2_region3", 1.0 / 0.899}, {"phase2_region4", 1.0 / 0.96}};
  l.constant_product = 1.0;
  for (const auto& [name, f] : l.factors) l.constant_product *= f;
  l.epsilon = eps;
  l.n = n;
  l.clean_bits = clean_bits;
  l.total_factor = l.constant_product / (eps * eps);
  l.floor = n / l.total_factor;
  l.entropy_cap = entropy_cap(n, eps);
  l.c = 1.0 / l.constant_product;
  return l;
}

double runtime_exponent(const std::vector<double>& sizes, const std::vector<double>& steps) {
  if (sizes.size() != steps.size()) throw std::invalid_argument("sizes and steps differ in length");
  if (sizes.size() < 4) throw std::invalid_argument("need at least 4 points to fit an exponent");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(sizes[i] > 0 && steps[i] > 0)) throw std::invalid_argument("sizes and steps must be positive");
    double x = std::log(sizes[i]), y = std::log(steps[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("sizes must not all be equal");
  return (m * sxy - sx * sy) / denom;
}

std::string orbit_csv(const std::vector<double>& values, const std::string& name) {
  std::string out = "i," + name + "\n";
  for (std::size_t i = 0; i < values.size(); ++i) out += std::to_string(i) + "," + format_double(values[i]) + "\n";
  return out;
}

}  // namespace spinref
