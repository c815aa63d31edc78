#include "spinref/thermal.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "spinref/compiler.hpp"

namespace spinref {

void BiasModel::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (kind == ModelKind::MarkovCorrelated) {
    if (!(ell >= 1.0)) throw std::invalid_argument("ell must be at least 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
  }
}

double BiasModel::rho() const { return std::pow(threshold, 1.0 / ell); }

ModelKind parse_model_kind(const std::string& name) {
  if (name == "binomial") return ModelKind::Binomial;
  if (name == "markov") return ModelKind::MarkovCorrelated;
  throw std::invalid_argument("unknown model '" + name + "' (expected binomial or markov)");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Binomial ? "binomial" : "markov"; }

Bits sample(const BiasModel& model, std::size_t n, std::uint64_t seed) {
  model.validate();
  if (n == 0) throw std::invalid_argument("sample: n must be positive");
  Rng rng(derive_seed(seed, {0x5A3u}));
  const double p_one = (1.0 - model.epsilon) / 2.0;
  Bits out(n);
  if (model.kind == ModelKind::Binomial) {
    for (auto& b : out) b = uniform01(rng) < p_one ? 1 : 0;
    return out;
  }
  // Stay with probability rho, otherwise redraw from the stationary law;
  // this gives marginal p_one and lag-d correlation rho^d.
  const double rho = model.rho();
  out[0] = uniform01(rng) < p_one ? 1 : 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (uniform01(rng) < rho) {
      out[i] = out[i - 1];
    } else {
      out[i] = uniform01(rng) < p_one ? 1 : 0;
    }
  }
  return out;
}

Permutation stride_shuffle_perm(std::size_t n) {
  if (n == 0 || !is_perfect_cube(n)) throw std::invalid_argument("stride shuffle needs a perfect cube");
  const std::size_t m = integer_root(n, 3);
  const std::size_t rows = m * m;
  Permutation perm(n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t s = 0; s < m; ++s) perm[r * m + s] = ((r + s) % rows) * m + s;
  }
  return perm;
}

Permutation uniform_random_perm(std::size_t n, Rng& rng) {
  Permutation perm = identity_permutation(n);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = uniform_below(rng, i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

Permutation uniform_random_perm(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x9E7u}));
  return uniform_random_perm(n, rng);
}

std::uint64_t apply_perm_as_transpositions(TapeState& state, std::span<const std::size_t> perm) {
  if (perm.size() > state.size()) throw std::invalid_argument("permutation longer than tape");
  const std::uint64_t before = state.steps();
  compile_permutation(perm).run(state);
  return state.steps() - before;
}

void write_packed(std::ostream& out, std::span<const Bit> bits) {
  const std::uint64_t n = bits.size();
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((n >> (8 * i)) & 0xFFu));
  for (std::size_t i = 0; i < bits.size(); i += 8) {
    unsigned byte = 0;
    for (std::size_t j = 0; j < 8 && i + j < bits.size(); ++j) byte |= unsigned{bits[i + j] & 1u} << j;
    out.put(static_cast<char>(byte));
  }
}

Bits read_packed(std::istream& in) {
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) {
    int c = in.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("packed bits: truncated header");
    n |= std::uint64_t(static_cast<unsigned char>(c)) << (8 * i);
  }
  Bits bits(n);
  for (std::size_t i = 0; i < n; i += 8) {
    int c = in.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("packed bits: truncated body");
    for (std::size_t j = 0; j < 8 && i + j < n; ++j) bits[i + j] = static_cast<Bit>((c >> j) & 1);
  }
  return bits;
}

std::string to_ascii(std::span<const Bit> bits, std::size_t line_width) {
  if (line_width == 0) line_width = 64;
  std::string s;
  s.reserve(bits.size() + bits.size() / line_width + 1);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    s.push_back(bits[i] ? '1' : '0');
    if ((i + 1) % line_width == 0 || i + 1 == bits.size()) s.push_back('\n');
  }
  return s;
}

Bits from_ascii(std::string_view text) {
  Bits bits;
  for (char c : text) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<Bit>(c - '0'));
    } else if (c != '\n' && c != '\r' && c != ' ') {
      throw std::invalid_argument("ascii bits: unexpected character");
    }
  }
  return bits;
}

}  // namespace spinref
