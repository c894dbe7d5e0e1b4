#ifndef TURBOEQ_COMMON_HPP
#define TURBOEQ_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace turboeq {

using cplx = std::complex<double>;

// LLR magnitudes are clamped here before any exp(); keeps all pmf weights
// strictly positive in double precision.
inline constexpr double kLlrClamp = 300.0;

// Floor applied to prior symbol variances so that weight-domain message
// updates stay invertible when the decoder saturates.
inline constexpr double kVarFloor = 1e-12;

inline double clamp_llr(double l) {
  if (std::isnan(l)) return 0.0;
  return std::clamp(l, -kLlrClamp, kLlrClamp);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 36.0) return x;
  if (x < -36.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

/// P[bit = 0] from L = ln(P0/P1).
inline double prob0_from_llr(double l) {
  return 1.0 / (1.0 + std::exp(-clamp_llr(l)));
}

/// log sum_i exp(t_i); -inf for an empty set.
inline double log_sum_exp(std::span<const double> terms) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace turboeq

#endif  // TURBOEQ_COMMON_HPP
