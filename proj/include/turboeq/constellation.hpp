#ifndef TURBOEQ_CONSTELLATION_HPP
#define TURBOEQ_CONSTELLATION_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "turboeq/common.hpp"

namespace turboeq {

/// First and second moment of one transmitted symbol under a Gaussian model.
struct SymbolMoments {
  cplx mean{0.0, 0.0};
  double var = 1.0;
};

inline std::uint32_t binary_to_gray(std::uint32_t v) { return v ^ (v >> 1); }

inline std::uint32_t gray_to_binary(std::uint32_t g) {
  std::uint32_t b = 0;
  for (; g; g >>= 1) b ^= g;
  return b;
}

/// Unit-energy M-QAM alphabet with Gray bit labels.
///
/// Labels are read MSB-first: bit q of point i is (labels[i] >> (b-1-q)) & 1.
/// For square QAM the first b/2 bits select the in-phase level and the last
/// b/2 bits the quadrature level, each through a binary-reflected Gray code
/// with the all-zeros group on the most positive level. BPSK maps bit 0 to +1.
class Alphabet {
 public:
  int order = 0;                        // M
  int bits_per_symbol = 0;              // b = log2(M)
  std::vector<cplx> points;             // size M
  std::vector<std::uint32_t> labels;    // size M, labels[i] in [0, M)
  std::vector<std::vector<int>> set0;   // set0[q]: indices with bit q == 0
  std::vector<std::vector<int>> set1;   // set1[q]: indices with bit q == 1
  double energy = 1.0;                  // Es = (1/M) sum |s|^2

  int bit_of(int point_index, int q) const {
    return static_cast<int>(
        (labels[static_cast<std::size_t>(point_index)] >>
         (bits_per_symbol - 1 - q)) &
        1u);
  }

  int index_of_label(std::uint32_t label) const {
    return label_to_index_[label];
  }

  std::vector<int> label_to_index_;  // inverse label table, size M
};

inline Alphabet build_alphabet(int order) {
  if (order != 2 && order != 4 && order != 16 && order != 64 && order != 256)
    throw std::invalid_argument("build_alphabet: unsupported order " +
                                std::to_string(order));
  Alphabet a;
  a.order = order;
  a.bits_per_symbol = 0;
  for (int m = order; m > 1; m >>= 1) ++a.bits_per_symbol;

  if (order == 2) {
    a.points = {cplx{1.0, 0.0}, cplx{-1.0, 0.0}};
    a.labels = {0u, 1u};
  } else {
    const int half = a.bits_per_symbol / 2;
    const int levels = 1 << half;  // sqrt(M) levels per axis
    const double scale =
        1.0 / std::sqrt(2.0 * (static_cast<double>(order) - 1.0) / 3.0);
    a.points.resize(static_cast<std::size_t>(order));
    a.labels.resize(static_cast<std::size_t>(order));
    int n = 0;
    for (int ii = 0; ii < levels; ++ii) {
      for (int qi = 0; qi < levels; ++qi) {
        const double re = scale * static_cast<double>(levels - 1 - 2 * ii);
        const double im = scale * static_cast<double>(levels - 1 - 2 * qi);
        a.points[static_cast<std::size_t>(n)] = cplx{re, im};
        a.labels[static_cast<std::size_t>(n)] =
            (binary_to_gray(static_cast<std::uint32_t>(ii)) << half) |
            binary_to_gray(static_cast<std::uint32_t>(qi));
        ++n;
      }
    }
  }

  a.set0.assign(static_cast<std::size_t>(a.bits_per_symbol), {});
  a.set1.assign(static_cast<std::size_t>(a.bits_per_symbol), {});
  for (int i = 0; i < order; ++i)
    for (int q = 0; q < a.bits_per_symbol; ++q)
      (a.bit_of(i, q) == 0 ? a.set0 : a.set1)[static_cast<std::size_t>(q)]
          .push_back(i);

  a.label_to_index_.assign(static_cast<std::size_t>(order), -1);
  for (int i = 0; i < order; ++i)
    a.label_to_index_[a.labels[static_cast<std::size_t>(i)]] = i;

  double es = 0.0;
  for (const cplx& s : a.points) es += std::norm(s);
  a.energy = es / static_cast<double>(order);
  return a;
}

inline std::vector<cplx> modulate(std::span<const std::uint8_t> bits,
                                  const Alphabet& a) {
  const int b = a.bits_per_symbol;
  if (bits.size() % static_cast<std::size_t>(b) != 0)
    throw std::invalid_argument("modulate: bit count not divisible by b");
  std::vector<cplx> out(bits.size() / static_cast<std::size_t>(b));
  for (std::size_t g = 0; g < out.size(); ++g) {
    std::uint32_t label = 0;
    for (int q = 0; q < b; ++q)
      label = (label << 1) | (bits[g * static_cast<std::size_t>(b) +
                                   static_cast<std::size_t>(q)] &
                              1u);
    out[g] = a.points[static_cast<std::size_t>(a.index_of_label(label))];
  }
  return out;
}

/// Nearest-point decision; inverse of modulate on noiseless samples.
inline std::vector<std::uint8_t> hard_demap(std::span<const cplx> symbols,
                                            const Alphabet& a) {
  const int b = a.bits_per_symbol;
  std::vector<std::uint8_t> bits(symbols.size() * static_cast<std::size_t>(b));
  for (std::size_t g = 0; g < symbols.size(); ++g) {
    int best = 0;
    double bestd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.order; ++i) {
      const double d = std::norm(symbols[g] - a.points[static_cast<std::size_t>(i)]);
      if (d < bestd) {
        bestd = d;
        best = i;
      }
    }
    for (int q = 0; q < b; ++q)
      bits[g * static_cast<std::size_t>(b) + static_cast<std::size_t>(q)] =
          static_cast<std::uint8_t>(a.bit_of(best, q));
  }
  return bits;
}

namespace detail {

/// log p(s_i) for every point under independent bit marginals,
/// llrs[q] = ln(P[bit q = 0] / P[bit q = 1]).
inline void log_prior_pmf(std::span<const double> llrs, const Alphabet& a,
                          std::vector<double>& logp) {
  const int b = a.bits_per_symbol;
  logp.assign(static_cast<std::size_t>(a.order), 0.0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (int q = 0; q < b; ++q) {
    const double raw = llrs[static_cast<std::size_t>(q)];
    double lp0, lp1;
    if (std::isinf(raw)) {  // exact point mass on one bit value
      lp0 = raw > 0 ? 0.0 : -kInf;
      lp1 = raw > 0 ? -kInf : 0.0;
    } else {
      const double l = clamp_llr(raw);
      // log P[c=0] = -softplus(-L), log P[c=1] = -softplus(+L)
      lp0 = -softplus(-l);
      lp1 = -softplus(l);
    }
    for (int i = 0; i < a.order; ++i)
      logp[static_cast<std::size_t>(i)] += a.bit_of(i, q) == 0 ? lp0 : lp1;
  }
}

inline SymbolMoments moments_from_logpmf(std::span<const double> logp,
                                         const Alphabet& a) {
  SymbolMoments mom;
  cplx mean{0.0, 0.0};
  double e2 = 0.0;
  for (int i = 0; i < a.order; ++i) {
    const double p = std::exp(logp[static_cast<std::size_t>(i)]);
    mean += p * a.points[static_cast<std::size_t>(i)];
    e2 += p * std::norm(a.points[static_cast<std::size_t>(i)]);
  }
  mom.mean = mean;
  mom.var = std::max(0.0, e2 - std::norm(mean));
  return mom;
}

}  // namespace detail

/// Gaussian prior moments of one symbol from its b prior bit LLRs.
inline SymbolMoments prior_moments(std::span<const double> llrs,
                                   const Alphabet& a) {
  if (llrs.size() != static_cast<std::size_t>(a.bits_per_symbol))
    throw std::invalid_argument("prior_moments: wrong LLR count");
  std::vector<double> logp;
  detail::log_prior_pmf(llrs, a, logp);
  return detail::moments_from_logpmf(logp, a);
}

/// Per-symbol parameters of the post-equalization model xhat = mu*x + eta,
/// eta ~ CN(0, sigma2).
struct WpParams {
  cplx x_hat{0.0, 0.0};
  double mu = 0.0;
  double sigma2 = 0.0;
};

/// Extrinsic LLRs of the b bits of one symbol given its WP parameters and
/// prior bit LLRs. The prior log-ratio is subtracted per bit, so the result
/// carries no own-prior contribution.
inline std::vector<double> extrinsic_bit_llrs(const WpParams& wp,
                                              std::span<const double> prior_llrs,
                                              const Alphabet& a) {
  if (!(wp.sigma2 > 0.0))
    throw std::invalid_argument("extrinsic_bit_llrs: sigma2 must be positive");
  const int b = a.bits_per_symbol;
  if (prior_llrs.size() != static_cast<std::size_t>(b))
    throw std::invalid_argument("extrinsic_bit_llrs: wrong LLR count");

  std::vector<double> logp;
  detail::log_prior_pmf(prior_llrs, a, logp);

  std::vector<double> metric(static_cast<std::size_t>(a.order));
  for (int i = 0; i < a.order; ++i)
    metric[static_cast<std::size_t>(i)] =
        logp[static_cast<std::size_t>(i)] -
        std::norm(wp.x_hat - wp.mu * a.points[static_cast<std::size_t>(i)]) /
            wp.sigma2;

  std::vector<double> out(static_cast<std::size_t>(b));
  std::vector<double> t0, t1, p0, p1;
  for (int q = 0; q < b; ++q) {
    t0.clear();
    t1.clear();
    p0.clear();
    p1.clear();
    for (int i : a.set0[static_cast<std::size_t>(q)]) {
      t0.push_back(metric[static_cast<std::size_t>(i)]);
      p0.push_back(logp[static_cast<std::size_t>(i)]);
    }
    for (int i : a.set1[static_cast<std::size_t>(q)]) {
      t1.push_back(metric[static_cast<std::size_t>(i)]);
      p1.push_back(logp[static_cast<std::size_t>(i)]);
    }
    out[static_cast<std::size_t>(q)] =
        (log_sum_exp(t0) - log_sum_exp(t1)) -
        (log_sum_exp(p0) - log_sum_exp(p1));
  }
  return out;
}

/// Bit LLRs of one AWGN observation, L(q) = ln sum_{S_q0} exp(-|y-s|^2/N0)
/// over the same sum for S_q1.
inline std::vector<double> awgn_demapper_llrs(cplx y, double n0,
                                              const Alphabet& a) {
  if (!(n0 > 0.0))
    throw std::invalid_argument("awgn_demapper_llrs: N0 must be positive");
  const int b = a.bits_per_symbol;
  std::vector<double> metric(static_cast<std::size_t>(a.order));
  for (int i = 0; i < a.order; ++i)
    metric[static_cast<std::size_t>(i)] =
        -std::norm(y - a.points[static_cast<std::size_t>(i)]) / n0;

  std::vector<double> out(static_cast<std::size_t>(b));
  std::vector<double> t0, t1;
  for (int q = 0; q < b; ++q) {
    t0.clear();
    t1.clear();
    for (int i : a.set0[static_cast<std::size_t>(q)])
      t0.push_back(metric[static_cast<std::size_t>(i)]);
    for (int i : a.set1[static_cast<std::size_t>(q)])
      t1.push_back(metric[static_cast<std::size_t>(i)]);
    out[static_cast<std::size_t>(q)] = log_sum_exp(t0) - log_sum_exp(t1);
  }
  return out;
}

}  // namespace turboeq

#endif  // TURBOEQ_CONSTELLATION_HPP
