#ifndef TURBOEQ_CODING_HPP
#define TURBOEQ_CODING_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "turboeq/common.hpp"
#include "turboeq/rng.hpp"

namespace turboeq {

/// Rate-1/2 feedforward convolutional code. Generators are octal, written in
/// the usual decimal-digits form (7 -> 111b, 133 -> 1011011b); the mask MSB
/// taps the current input bit.
struct CodeSpec {
  std::uint32_t gen0 = 0;  // binary tap mask
  std::uint32_t gen1 = 0;
  int constraint_length = 0;
  bool terminated = true;

  int memory() const { return constraint_length - 1; }
  int num_states() const { return 1 << memory(); }
};

inline std::uint32_t octal_to_mask(int octal_digits) {
  if (octal_digits <= 0)
    throw std::invalid_argument("octal_to_mask: generator must be positive");
  std::uint32_t mask = 0;
  int shift = 0;
  for (int v = octal_digits; v > 0; v /= 10) {
    const int digit = v % 10;
    if (digit > 7)
      throw std::invalid_argument("octal_to_mask: digit out of octal range");
    mask |= static_cast<std::uint32_t>(digit) << shift;
    shift += 3;
  }
  return mask;
}

inline CodeSpec make_code(int gen0_octal, int gen1_octal,
                          bool terminated = true) {
  CodeSpec spec;
  spec.gen0 = octal_to_mask(gen0_octal);
  spec.gen1 = octal_to_mask(gen1_octal);
  spec.terminated = terminated;
  spec.constraint_length =
      std::bit_width(spec.gen0 | spec.gen1);
  if (spec.constraint_length < 2)
    throw std::invalid_argument("make_code: constraint length must be >= 2");
  return spec;
}

/// Encode info bits; termination appends memory() zero tail bits. Output is
/// 2 bits per trellis step, gen0 stream first.
inline std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info,
                                        const CodeSpec& spec) {
  const int m = spec.memory();
  const std::size_t steps = info.size() + (spec.terminated ? m : 0);
  std::vector<std::uint8_t> out(2 * steps);
  std::uint32_t state = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::uint32_t u = k < info.size() ? (info[k] & 1u) : 0u;
    const std::uint32_t window = (u << m) | state;
    out[2 * k] = static_cast<std::uint8_t>(std::popcount(window & spec.gen0) & 1);
    out[2 * k + 1] =
        static_cast<std::uint8_t>(std::popcount(window & spec.gen1) & 1);
    state = window >> 1;
  }
  return out;
}

struct Interleaver {
  std::vector<std::size_t> perm;  // out[i] = in[perm[i]]

  template <typename T>
  std::vector<T> interleave(std::span<const T> in) const {
    if (in.size() != perm.size())
      throw std::invalid_argument("interleave: length mismatch");
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[perm[i]];
    return out;
  }

  template <typename T>
  std::vector<T> deinterleave(std::span<const T> in) const {
    if (in.size() != perm.size())
      throw std::invalid_argument("deinterleave: length mismatch");
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[perm[i]] = in[i];
    return out;
  }

  template <typename T>
  std::vector<T> interleave(const std::vector<T>& in) const {
    return interleave(std::span<const T>(in));
  }
  template <typename T>
  std::vector<T> deinterleave(const std::vector<T>& in) const {
    return deinterleave(std::span<const T>(in));
  }
};

inline Interleaver make_interleaver(std::size_t n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("make_interleaver: n must be >= 1");
  Interleaver il;
  il.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) il.perm[i] = i;
  rng.shuffle(il.perm);
  return il;
}

inline Interleaver make_interleaver(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0, StreamPurpose::Interleaver);
  return make_interleaver(n, rng);
}

struct AppDecodeResult {
  std::vector<double> extrinsic_code_llrs;  // posterior minus input, per coded bit
  std::vector<double> info_llrs;            // posterior LLRs of info bits
  std::vector<std::uint8_t> info_bits;      // hard decisions
};

namespace detail {

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = a > b ? a : b;
  return hi + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace detail

/// Exact log-MAP APP decoding of one terminated (or open) codeword.
/// code_llrs holds one LLR per coded bit, ln(P0/P1), tail steps included.
inline AppDecodeResult app_decode(std::span<const double> code_llrs,
                                  const CodeSpec& spec) {
  if (code_llrs.size() % 2 != 0)
    throw std::invalid_argument("app_decode: odd LLR count");
  const int steps = static_cast<int>(code_llrs.size() / 2);
  const int m = spec.memory();
  if (spec.terminated && steps <= m)
    throw std::invalid_argument("app_decode: block shorter than tail");
  const int n_states = spec.num_states();
  const int n_info = spec.terminated ? steps - m : steps;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // Per-state transition tables: next state and the two output bits for
  // input u in {0, 1}.
  std::vector<std::array<int, 2>> next(static_cast<std::size_t>(n_states));
  std::vector<std::array<int, 2>> out0(static_cast<std::size_t>(n_states));
  std::vector<std::array<int, 2>> out1(static_cast<std::size_t>(n_states));
  for (int s = 0; s < n_states; ++s)
    for (int u = 0; u < 2; ++u) {
      const std::uint32_t window =
          (static_cast<std::uint32_t>(u) << m) | static_cast<std::uint32_t>(s);
      next[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] =
          static_cast<int>(window >> 1);
      out0[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] =
          std::popcount(window & spec.gen0) & 1;
      out1[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] =
          std::popcount(window & spec.gen1) & 1;
    }

  const auto gamma = [&](int k, int s, int u) {
    const double l0 = code_llrs[static_cast<std::size_t>(2 * k)];
    const double l1 = code_llrs[static_cast<std::size_t>(2 * k + 1)];
    const int c0 = out0[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
    const int c1 = out1[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
    return (c0 == 0 ? l0 : -l0) * 0.5 + (c1 == 0 ? l1 : -l1) * 0.5;
  };

  // Forward pass, normalized by the running maximum.
  std::vector<std::vector<double>> alpha(
      static_cast<std::size_t>(steps + 1),
      std::vector<double>(static_cast<std::size_t>(n_states), kNegInf));
  alpha[0][0] = 0.0;
  for (int k = 0; k < steps; ++k) {
    auto& cur = alpha[static_cast<std::size_t>(k)];
    auto& nxt = alpha[static_cast<std::size_t>(k + 1)];
    const int u_max = (spec.terminated && k >= n_info) ? 1 : 2;
    for (int s = 0; s < n_states; ++s) {
      if (cur[static_cast<std::size_t>(s)] == kNegInf) continue;
      for (int u = 0; u < u_max; ++u) {
        const int ns = next[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
        nxt[static_cast<std::size_t>(ns)] =
            detail::log_add(nxt[static_cast<std::size_t>(ns)],
                            cur[static_cast<std::size_t>(s)] + gamma(k, s, u));
      }
    }
    double hi = kNegInf;
    for (double v : nxt) hi = v > hi ? v : hi;
    for (double& v : nxt) v -= hi;
  }

  // Backward pass.
  std::vector<std::vector<double>> beta(
      static_cast<std::size_t>(steps + 1),
      std::vector<double>(static_cast<std::size_t>(n_states),
                          spec.terminated ? kNegInf : 0.0));
  if (spec.terminated)
    beta[static_cast<std::size_t>(steps)][0] = 0.0;
  else
    beta[static_cast<std::size_t>(steps)].assign(
        static_cast<std::size_t>(n_states), 0.0);
  for (int k = steps - 1; k >= 0; --k) {
    auto& cur = beta[static_cast<std::size_t>(k)];
    cur.assign(static_cast<std::size_t>(n_states), kNegInf);
    const auto& nxt = beta[static_cast<std::size_t>(k + 1)];
    const int u_max = (spec.terminated && k >= n_info) ? 1 : 2;
    for (int s = 0; s < n_states; ++s)
      for (int u = 0; u < u_max; ++u) {
        const int ns = next[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
        if (nxt[static_cast<std::size_t>(ns)] == kNegInf) continue;
        cur[static_cast<std::size_t>(s)] = detail::log_add(
            cur[static_cast<std::size_t>(s)],
            nxt[static_cast<std::size_t>(ns)] + gamma(k, s, u));
      }
    double hi = kNegInf;
    for (double v : cur) hi = v > hi ? v : hi;
    if (hi != kNegInf)
      for (double& v : cur) v -= hi;
  }

  AppDecodeResult res;
  res.extrinsic_code_llrs.resize(code_llrs.size());
  res.info_llrs.resize(static_cast<std::size_t>(n_info));
  res.info_bits.resize(static_cast<std::size_t>(n_info));
  for (int k = 0; k < steps; ++k) {
    double num_u = kNegInf, den_u = kNegInf;
    double num_c0 = kNegInf, den_c0 = kNegInf;
    double num_c1 = kNegInf, den_c1 = kNegInf;
    const int u_max = (spec.terminated && k >= n_info) ? 1 : 2;
    for (int s = 0; s < n_states; ++s) {
      const double a = alpha[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
      if (a == kNegInf) continue;
      for (int u = 0; u < u_max; ++u) {
        const int ns = next[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
        const double w =
            a + gamma(k, s, u) +
            beta[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(ns)];
        if (w == kNegInf) continue;
        if (u == 0)
          num_u = detail::log_add(num_u, w);
        else
          den_u = detail::log_add(den_u, w);
        if (out0[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] == 0)
          num_c0 = detail::log_add(num_c0, w);
        else
          den_c0 = detail::log_add(den_c0, w);
        if (out1[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] == 0)
          num_c1 = detail::log_add(num_c1, w);
        else
          den_c1 = detail::log_add(den_c1, w);
      }
    }
    const auto posterior = [](double num, double den) {
      if (num == kNegInf) return -kLlrClamp;
      if (den == kNegInf) return kLlrClamp;
      return clamp_llr(num - den);
    };
    res.extrinsic_code_llrs[static_cast<std::size_t>(2 * k)] = clamp_llr(
        posterior(num_c0, den_c0) - code_llrs[static_cast<std::size_t>(2 * k)]);
    res.extrinsic_code_llrs[static_cast<std::size_t>(2 * k + 1)] =
        clamp_llr(posterior(num_c1, den_c1) -
                  code_llrs[static_cast<std::size_t>(2 * k + 1)]);
    if (k < n_info) {
      const double lu = posterior(num_u, den_u);
      res.info_llrs[static_cast<std::size_t>(k)] = lu;
      res.info_bits[static_cast<std::size_t>(k)] = lu < 0.0 ? 1 : 0;
    }
  }
  return res;
}

}  // namespace turboeq

#endif  // TURBOEQ_CODING_HPP
