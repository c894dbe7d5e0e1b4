#ifndef TURBOEQ_TURBO_HPP
#define TURBOEQ_TURBO_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "turboeq/channel.hpp"
#include "turboeq/coding.hpp"
#include "turboeq/common.hpp"
#include "turboeq/constellation.hpp"
#include "turboeq/gmp.hpp"
#include "turboeq/wp_bridge.hpp"

namespace turboeq {

/// Variance floor for symbol priors fed back into the equalizer. The
/// per-symbol extrinsic precision is recovered as 1/v_post - 1/v_prio, a
/// difference of two O(1/v) quantities; with v below ~1e-6 the O(1) true
/// difference drowns in rounding noise (~eps/v^2) and the feedback loop
/// diverges. Flooring at 1e-5 bounds that noise near 1e-6 while a "known"
/// symbol still leaks only ~1e-5 worth of interference variance.
inline constexpr double kFeedbackVarFloor = 1e-5;

/// One coded transmission: info bits -> convolutional code -> interleaver ->
/// zero padding -> M-QAM -> spatial multiplexing over N_t antennas. Padding
/// bits are known zeros appended after interleaving to make the bit count a
/// multiple of b*N_t; they are excluded from BER accounting.
struct TurboConfig {
  int iterations = 1;
  Alphabet alphabet;
  CodeSpec code;
  std::uint64_t interleaver_seed = 0;
  int n_t = 1;
  int n_r = 1;
  int n_info = 4096;

  int n_coded() const { return 2 * (n_info + (code.terminated ? code.memory() : 0)); }
  int n_pad() const {
    const int group = alphabet.bits_per_symbol * n_t;
    return (group - n_coded() % group) % group;
  }
  int n_symbols() const { return (n_coded() + n_pad()) / alphabet.bits_per_symbol; }
  int blocklen() const { return n_symbols() / n_t; }
};

inline void validate(const TurboConfig& cfg) {
  if (cfg.iterations < 1)
    throw std::invalid_argument("TurboConfig: iterations must be >= 1");
  if (cfg.n_t < 1 || cfg.n_r < 1)
    throw std::invalid_argument("TurboConfig: antenna counts must be >= 1");
  if (cfg.n_info < 1)
    throw std::invalid_argument("TurboConfig: n_info must be >= 1");
  if (std::fabs(cfg.alphabet.energy - 1.0) > 1e-12)
    throw std::invalid_argument("TurboConfig: alphabet energy must be 1");
  if ((cfg.n_coded() + cfg.n_pad()) % (cfg.alphabet.bits_per_symbol * cfg.n_t) != 0)
    throw std::invalid_argument("TurboConfig: framing arithmetic broken");
}

/// Fill an N_t x N block column by column: symbol s goes to time s / N_t,
/// antenna s mod N_t.
inline Eigen::MatrixXcd spatial_mux(std::span<const cplx> symbols, int n_t) {
  if (n_t < 1 || symbols.size() % static_cast<std::size_t>(n_t) != 0)
    throw std::invalid_argument("spatial_mux: symbol count not divisible by N_t");
  const int n = static_cast<int>(symbols.size()) / n_t;
  Eigen::MatrixXcd x(n_t, n);
  for (std::size_t s = 0; s < symbols.size(); ++s)
    x(static_cast<int>(s) % n_t, static_cast<int>(s) / n_t) = symbols[s];
  return x;
}

inline std::vector<cplx> spatial_demux(const Eigen::MatrixXcd& x) {
  std::vector<cplx> out(static_cast<std::size_t>(x.size()));
  for (int k = 0; k < x.cols(); ++k)
    for (int j = 0; j < x.rows(); ++j)
      out[static_cast<std::size_t>(k * x.rows() + j)] = x(j, k);
  return out;
}

struct TxFrame {
  std::vector<std::uint8_t> info;
  std::vector<std::uint8_t> coded;    // encoder output order
  std::vector<std::uint8_t> stream;   // interleaved + padding zeros
  Eigen::MatrixXcd symbols;           // N_t x N
};

inline TxFrame build_frame(std::span<const std::uint8_t> info,
                           const TurboConfig& cfg, const Interleaver& il) {
  validate(cfg);
  if (info.size() != static_cast<std::size_t>(cfg.n_info))
    throw std::invalid_argument("build_frame: wrong info length");
  TxFrame f;
  f.info.assign(info.begin(), info.end());
  f.coded = encode(info, cfg.code);
  f.stream = il.interleave(f.coded);
  f.stream.resize(static_cast<std::size_t>(cfg.n_coded() + cfg.n_pad()), 0);
  const std::vector<cplx> syms = modulate(f.stream, cfg.alphabet);
  f.symbols = spatial_mux(syms, cfg.n_t);
  return f;
}

/// Reliability of an LLR sequence against known bits: the mean of
/// 1 - log2(1 + exp(-Z)) with Z = (-1)^c * L, clamped to [0, 1].
inline double information_content(std::span<const std::uint8_t> bits,
                                  std::span<const double> llrs) {
  if (bits.size() != llrs.size())
    throw std::invalid_argument("information_content: length mismatch");
  if (bits.empty()) return 0.0;
  constexpr double kLn2 = 0.6931471805599453;
  double acc = 0.0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const double z = (bits[i] & 1) ? -llrs[i] : llrs[i];
    acc += 1.0 - softplus(-z) / kLn2;
  }
  const double mean = acc / static_cast<double>(bits.size());
  return std::min(1.0, std::max(0.0, mean));
}

struct IterationStats {
  int info_errors = -1;            // -1 when no ground truth was supplied
  double i_z_extrinsic = 0.0;      // decoder extrinsic LLRs vs true coded bits
  double i_z_posterior = 0.0;      // decoder posterior LLRs vs true coded bits
  double mean_mu = 0.0;            // average post-equalization signal gain
  double degenerate_fraction = 0.0;  // symbols with no extrinsic information
};

struct TurboResult {
  std::vector<std::uint8_t> info_bits;
  std::vector<double> info_llrs;
  std::vector<IterationStats> trace;
};

/// Iterative receiver: equalizer and APP decoder exchange extrinsic LLRs
/// through the (de)interleaver. The first iteration runs with uniform symbol
/// priors; padding positions carry an exact known-zero prior throughout and
/// their extrinsic output is discarded.
inline TurboResult turbo_decode(const Eigen::MatrixXcd& y,
                                const ChannelRealization& ch,
                                const TurboConfig& cfg, double n0,
                                const Interleaver& il,
                                const TxFrame* truth = nullptr) {
  validate(cfg);
  const int b = cfg.alphabet.bits_per_symbol;
  const int nc = cfg.n_coded();
  const int n_stream = nc + cfg.n_pad();
  const int n_sym = cfg.n_symbols();
  if (il.perm.size() != static_cast<std::size_t>(nc))
    throw std::invalid_argument("turbo_decode: interleaver length mismatch");

  const StateSpace ss = make_state_space(ch, cfg.blocklen(), n0);

  TurboResult res;
  res.trace.reserve(static_cast<std::size_t>(cfg.iterations));
  std::vector<double> dec_ext(static_cast<std::size_t>(nc), 0.0);
  std::vector<double> stream_prior(static_cast<std::size_t>(n_stream));
  std::vector<double> stream_ext(static_cast<std::size_t>(n_stream));
  SymbolPriors priors;
  priors.mean.resize(static_cast<std::size_t>(n_sym));
  priors.var.resize(static_cast<std::size_t>(n_sym));

  for (int it = 0; it < cfg.iterations; ++it) {
    const std::vector<double> permuted = il.interleave(dec_ext);
    std::copy(permuted.begin(), permuted.end(), stream_prior.begin());
    std::fill(stream_prior.begin() + nc, stream_prior.end(),
              std::numeric_limits<double>::infinity());

    for (int s = 0; s < n_sym; ++s) {
      const SymbolMoments mom = prior_moments(
          std::span<const double>(stream_prior)
              .subspan(static_cast<std::size_t>(s) * b, static_cast<std::size_t>(b)),
          cfg.alphabet);
      priors.mean[static_cast<std::size_t>(s)] = mom.mean;
      priors.var[static_cast<std::size_t>(s)] = std::max(mom.var, kFeedbackVarFloor);
    }

    const PosteriorBlock post = equalize(ss, y, priors);

    IterationStats stats;
    int degenerate = 0;
    double mu_acc = 0.0;
    for (int s = 0; s < n_sym; ++s) {
      const std::size_t su = static_cast<std::size_t>(s);
      const SymbolMoments prio{priors.mean[su], priors.var[su]};
      const SymbolMoments pos{post.mean[su], post.var[su]};
      const auto bit_span = std::span<const double>(stream_prior)
                                .subspan(su * static_cast<std::size_t>(b),
                                         static_cast<std::size_t>(b));
      const std::optional<WpParams> wp = wp_from_posteriors(pos, prio);
      if (!wp) {
        ++degenerate;
        std::fill_n(stream_ext.begin() + s * b, b, 0.0);
        continue;
      }
      mu_acc += wp->mu;
      const std::vector<double> ext =
          extrinsic_bit_llrs(*wp, bit_span, cfg.alphabet);
      std::copy(ext.begin(), ext.end(), stream_ext.begin() + s * b);
    }
    stats.degenerate_fraction =
        static_cast<double>(degenerate) / static_cast<double>(n_sym);
    stats.mean_mu =
        degenerate == n_sym ? 0.0 : mu_acc / static_cast<double>(n_sym - degenerate);

    std::vector<double> eq_ext(stream_ext.begin(), stream_ext.begin() + nc);
    const std::vector<double> dec_in = il.deinterleave(eq_ext);
    const AppDecodeResult dec = app_decode(dec_in, cfg.code);
    dec_ext = dec.extrinsic_code_llrs;

    if (truth != nullptr) {
      int errs = 0;
      for (int i = 0; i < cfg.n_info; ++i)
        errs += dec.info_bits[static_cast<std::size_t>(i)] !=
                truth->info[static_cast<std::size_t>(i)];
      stats.info_errors = errs;
      stats.i_z_extrinsic = information_content(truth->coded, dec_ext);
      std::vector<double> posterior(dec_in.size());
      for (std::size_t i = 0; i < dec_in.size(); ++i)
        posterior[i] = dec_in[i] + dec_ext[i];
      stats.i_z_posterior = information_content(truth->coded, posterior);
    }
    res.trace.push_back(stats);

    if (it == cfg.iterations - 1) {
      res.info_bits = dec.info_bits;
      res.info_llrs = dec.info_llrs;
    }
  }
  return res;
}

inline TurboResult turbo_decode(const Eigen::MatrixXcd& y,
                                const ChannelRealization& ch,
                                const TurboConfig& cfg, double n0,
                                const TxFrame* truth = nullptr) {
  const Interleaver il = make_interleaver(static_cast<std::size_t>(cfg.n_coded()),
                                          cfg.interleaver_seed);
  return turbo_decode(y, ch, cfg, n0, il, truth);
}

/// Genie matched-filter baseline. Every symbol is received free of
/// interference through its own L*N_r-entry channel signature, maximal-ratio
/// combined into z = x + n_eff with n_eff ~ CN(0, N0/||h||^2), demapped with
/// uniform priors and decoded once.
inline std::vector<std::uint8_t> mfb_decode(const TxFrame& frame,
                                            const ChannelRealization& ch,
                                            const TurboConfig& cfg, double n0,
                                            const Interleaver& il,
                                            RngStream& noise_rng) {
  validate(cfg);
  const int b = cfg.alphabet.bits_per_symbol;
  const int nc = cfg.n_coded();
  const int n = cfg.blocklen();
  const int nt = cfg.n_t;
  const int nr = ch.n_r();
  const int total = n + ch.memory();

  Eigen::MatrixXcd noise(nr, total);
  for (int k = 0; k < total; ++k)
    for (int r = 0; r < nr; ++r) noise(r, k) = noise_rng.cgaussian(n0);

  std::vector<double> gain(static_cast<std::size_t>(nt), 0.0);
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < ch.length(); ++i)
      gain[static_cast<std::size_t>(j)] +=
          ch.taps[static_cast<std::size_t>(i)].col(j).squaredNorm();

  std::vector<double> stream_llrs(static_cast<std::size_t>(nc + cfg.n_pad()), 0.0);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < nt; ++j) {
      const double g = gain[static_cast<std::size_t>(j)];
      const int s = t * nt + j;
      if (!(g > 0.0)) continue;  // dead signature carries no information
      cplx mrc{0.0, 0.0};
      for (int i = 0; i < ch.length(); ++i) {
        const Eigen::VectorXcd sig = ch.taps[static_cast<std::size_t>(i)].col(j);
        mrc += sig.dot(noise.col(t + i));  // sig^H n
      }
      const cplx z = frame.symbols(j, t) + mrc / g;
      const std::vector<double> llrs =
          awgn_demapper_llrs(z, n0 / g, cfg.alphabet);
      std::copy(llrs.begin(), llrs.end(),
                stream_llrs.begin() + static_cast<std::size_t>(s) * b);
    }

  std::vector<double> data(stream_llrs.begin(), stream_llrs.begin() + nc);
  const std::vector<double> dec_in = il.deinterleave(data);
  const AppDecodeResult dec = app_decode(dec_in, cfg.code);
  return dec.info_bits;
}

}  // namespace turboeq

#endif  // TURBOEQ_TURBO_HPP
