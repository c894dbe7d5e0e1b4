#ifndef TURBOEQ_CHANNEL_HPP
#define TURBOEQ_CHANNEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "turboeq/common.hpp"
#include "turboeq/rng.hpp"

namespace turboeq {

/// One block-fading realization: taps H_0..H_{L-1}, each N_r x N_t.
struct ChannelRealization {
  std::vector<Eigen::MatrixXcd> taps;

  int n_t() const { return static_cast<int>(taps.front().cols()); }
  int n_r() const { return static_cast<int>(taps.front().rows()); }
  int length() const { return static_cast<int>(taps.size()); }
  int memory() const { return length() - 1; }  // J = L - 1
};

/// I.i.d. Rayleigh taps with uniform power-delay profile, entry variance 1/L.
inline ChannelRealization generate_rayleigh(int n_t, int n_r, int length,
                                            RngStream& rng) {
  if (n_t < 1 || n_r < 1 || length < 1)
    throw std::invalid_argument("generate_rayleigh: dimensions must be >= 1");
  ChannelRealization ch;
  ch.taps.reserve(static_cast<std::size_t>(length));
  const double tap_var = 1.0 / static_cast<double>(length);
  for (int i = 0; i < length; ++i) {
    Eigen::MatrixXcd h(n_r, n_t);
    for (int r = 0; r < n_r; ++r)
      for (int c = 0; c < n_t; ++c) h(r, c) = rng.cgaussian(tap_var);
    ch.taps.push_back(std::move(h));
  }
  return ch;
}

/// Deterministic single-antenna channel from a scalar tap list.
inline ChannelRealization static_channel(const std::vector<cplx>& taps) {
  if (taps.empty())
    throw std::invalid_argument("static_channel: empty tap list");
  ChannelRealization ch;
  ch.taps.reserve(taps.size());
  for (cplx t : taps) {
    Eigen::MatrixXcd h(1, 1);
    h(0, 0) = t;
    ch.taps.push_back(std::move(h));
  }
  return ch;
}

/// Stacked forms of a realization for a block of N symbol vectors.
///
/// Hbar = [H_J ... H_0] acts on the state x_bar_k = [x_{k-J}; ...; x_k].
/// Hconv is the banded block-Toeplitz matrix with N+J block rows and N block
/// columns; block (r, c) equals H_{r-c} when 0 <= r-c <= J and 0 otherwise.
struct StackedChannel {
  Eigen::MatrixXcd hbar;
  Eigen::MatrixXcd hconv;
  int n = 0;
  int j = 0;
};

inline StackedChannel build_stacked(const ChannelRealization& ch, int n) {
  if (n < 1) throw std::invalid_argument("build_stacked: N must be >= 1");
  const int nt = ch.n_t();
  const int nr = ch.n_r();
  const int len = ch.length();
  const int j = ch.memory();

  StackedChannel st;
  st.n = n;
  st.j = j;
  st.hbar = Eigen::MatrixXcd::Zero(nr, nt * len);
  for (int i = 0; i < len; ++i)
    st.hbar.block(0, (j - i) * nt, nr, nt) = ch.taps[static_cast<std::size_t>(i)];

  st.hconv = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nr) * (n + j),
                                    static_cast<Eigen::Index>(nt) * n);
  for (int c = 0; c < n; ++c)
    for (int i = 0; i < len; ++i)
      st.hconv.block((c + i) * nr, c * nt, nr, nt) =
          ch.taps[static_cast<std::size_t>(i)];
  return st;
}

/// Pass a symbol block (N_t x N, column k = x_{k+1}) through the channel.
/// Returns N_r x (N+J) observations including the trailing ISI tail; x_k = 0
/// outside the block. N0 = 0 gives the noiseless output.
inline Eigen::MatrixXcd transmit(const Eigen::MatrixXcd& x,
                                 const ChannelRealization& ch, double n0,
                                 RngStream& rng) {
  if (x.rows() != ch.n_t())
    throw std::invalid_argument("transmit: symbol rows != N_t");
  if (n0 < 0.0) throw std::invalid_argument("transmit: N0 must be >= 0");
  const int n = static_cast<int>(x.cols());
  const int nr = ch.n_r();
  const int j = ch.memory();

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(nr, n + j);
  for (int k = 0; k < n + j; ++k)
    for (int i = 0; i < ch.length(); ++i) {
      const int src = k - i;
      if (src >= 0 && src < n)
        y.col(k) += ch.taps[static_cast<std::size_t>(i)] * x.col(src);
    }
  if (n0 > 0.0)
    for (int k = 0; k < n + j; ++k)
      for (int r = 0; r < nr; ++r) y(r, k) += rng.cgaussian(n0);
  return y;
}

inline std::string format_complex(cplx z) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gj", z.real(), z.imag());
  return buf;
}

inline cplx parse_complex(const std::string& tok) {
  if (tok.empty() || tok.back() != 'j')
    throw std::invalid_argument("parse_complex: token must end in j: " + tok);
  const std::string body = tok.substr(0, tok.size() - 1);
  // Split at the sign of the imaginary part: the last +/- not part of an
  // exponent and not the leading sign.
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    const char c = body[i];
    if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos)
    throw std::invalid_argument("parse_complex: missing imaginary part: " + tok);
  std::size_t used = 0;
  const double re = std::stod(body.substr(0, split), &used);
  if (used != split)
    throw std::invalid_argument("parse_complex: bad real part: " + tok);
  const std::string ims = body.substr(split);
  const double im = std::stod(ims, &used);
  if (used != ims.size())
    throw std::invalid_argument("parse_complex: bad imaginary part: " + tok);
  return {re, im};
}

/// Text form: a header line "channel nt <N_t> nr <N_r> taps <L>" followed by
/// the rows of H_0, H_1, ... in order, one matrix row per line, entries as
/// "re+imj" tokens separated by spaces.
inline std::string channel_to_text(const ChannelRealization& ch) {
  std::ostringstream os;
  os << "channel nt " << ch.n_t() << " nr " << ch.n_r() << " taps "
     << ch.length() << "\n";
  for (const auto& h : ch.taps)
    for (int r = 0; r < h.rows(); ++r) {
      for (int c = 0; c < h.cols(); ++c) {
        if (c) os << ' ';
        os << format_complex(h(r, c));
      }
      os << "\n";
    }
  return os.str();
}

inline ChannelRealization channel_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string word;
  int nt = 0, nr = 0, len = 0;
  if (!(is >> word) || word != "channel")
    throw std::invalid_argument("channel_from_text: missing header");
  while (is >> word) {
    if (word == "nt")
      is >> nt;
    else if (word == "nr")
      is >> nr;
    else if (word == "taps") {
      is >> len;
      break;
    } else {
      throw std::invalid_argument("channel_from_text: bad header field " + word);
    }
  }
  if (nt < 1 || nr < 1 || len < 1)
    throw std::invalid_argument("channel_from_text: bad dimensions");

  ChannelRealization ch;
  for (int i = 0; i < len; ++i) {
    Eigen::MatrixXcd h(nr, nt);
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nt; ++c) {
        if (!(is >> word))
          throw std::invalid_argument("channel_from_text: truncated data");
        h(r, c) = parse_complex(word);
      }
    ch.taps.push_back(std::move(h));
  }
  return ch;
}

}  // namespace turboeq

#endif  // TURBOEQ_CHANNEL_HPP
