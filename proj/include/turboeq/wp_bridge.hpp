#ifndef TURBOEQ_WP_BRIDGE_HPP
#define TURBOEQ_WP_BRIDGE_HPP

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

#include "turboeq/common.hpp"
#include "turboeq/constellation.hpp"
#include "turboeq/gmp.hpp"

namespace turboeq {

/// Below this excess precision the posterior carries no usable extrinsic
/// information and the caller should emit zero extrinsic LLRs.
inline constexpr double kWpDegenerateEps = 1e-12;

/// Map posterior and prior moments of one symbol to the parameters of the
/// scalar model x_hat = mu*x + eta, eta ~ CN(0, sigma2), for a unit-energy
/// alphabet: r = 1 + 1/v_post - 1/v_prio, x_hat = (m_post/v_post -
/// m_prio/v_prio)/r, mu = 1 - 1/r, sigma2 = mu(1-mu). Returns nothing when
/// r <= 1 + eps (the equalizer learned nothing beyond the prior).
inline std::optional<WpParams> wp_from_posteriors(const SymbolMoments& post,
                                                  const SymbolMoments& prio) {
  if (!(post.var > 0.0) || !(prio.var > 0.0))
    throw std::invalid_argument("wp_from_posteriors: variances must be positive");
  const double r = 1.0 + 1.0 / post.var - 1.0 / prio.var;
  if (r <= 1.0 + kWpDegenerateEps) return std::nullopt;
  WpParams wp;
  wp.x_hat = (post.mean / post.var - prio.mean / prio.var) / r;
  wp.mu = 1.0 - 1.0 / r;
  wp.sigma2 = wp.mu * (1.0 - wp.mu);
  return wp;
}

/// Flatten N_r x (N+J) observations into the stacked column used by the
/// full-matrix oracles.
inline Eigen::VectorXcd stack_columns(const Eigen::MatrixXcd& y) {
  return Eigen::Map<const Eigen::VectorXcd>(y.data(), y.size());
}

namespace detail {

inline double floored(double v) { return v > kVarFloor ? v : kVarFloor; }

/// N0 I + sum_s v_s h_s h_s^H over all symbols; per-symbol interference
/// covariances are rank-one downdates of this.
inline Eigen::MatrixXcd full_input_covariance(const Eigen::MatrixXcd& hconv,
                                              const SymbolPriors& priors,
                                              double n0) {
  const Eigen::Index dim = hconv.rows();
  Eigen::MatrixXcd m =
      n0 * Eigen::MatrixXcd::Identity(dim, dim);
  for (Eigen::Index s = 0; s < hconv.cols(); ++s)
    m += floored(priors.var[static_cast<std::size_t>(s)]) * hconv.col(s) *
         hconv.col(s).adjoint();
  return m;
}

}  // namespace detail

/// Direct interference-cancelling LMMSE estimate of one symbol from the full
/// stacked system. The target symbol enters with the neutral prior (mean 0,
/// variance 1); every other symbol contributes its prior to the interference
/// covariance V_xi. Intended for small verification instances only.
inline WpParams wp_direct_oracle(const Eigen::VectorXcd& y,
                                 const Eigen::MatrixXcd& hconv,
                                 const SymbolPriors& priors, double n0,
                                 Eigen::Index symbol) {
  if (y.size() != hconv.rows())
    throw std::invalid_argument("wp_direct_oracle: observation size mismatch");
  if (hconv.cols() != static_cast<Eigen::Index>(priors.var.size()))
    throw std::invalid_argument("wp_direct_oracle: prior count mismatch");
  if (!(n0 > 0.0))
    throw std::invalid_argument("wp_direct_oracle: N0 must be positive");

  const Eigen::VectorXcd h = hconv.col(symbol);
  const double v_own = detail::floored(priors.var[static_cast<std::size_t>(symbol)]);
  Eigen::MatrixXcd v_xi = detail::full_input_covariance(hconv, priors, n0);
  v_xi -= v_own * h * h.adjoint();
  symmetrize(v_xi);

  Eigen::LLT<Eigen::MatrixXcd> llt(v_xi);
  if (llt.info() != Eigen::Success)
    throw SingularMatrixError("wp_direct_oracle: singular V_xi");
  const Eigen::VectorXcd u = llt.solve(h);
  const double g = u.dot(h).real();  // h^H V_xi^{-1} h
  const Eigen::VectorXcd w = u / (1.0 + g);

  Eigen::VectorXcd mean_all(hconv.cols());
  for (Eigen::Index s = 0; s < hconv.cols(); ++s)
    mean_all(s) = priors.mean[static_cast<std::size_t>(s)];
  const Eigen::VectorXcd resid = y - hconv * mean_all + h * mean_all(symbol);

  WpParams wp;
  wp.x_hat = w.dot(resid);
  wp.mu = g / (1.0 + g);
  wp.sigma2 = wp.mu * (1.0 - wp.mu);
  return wp;
}

/// Posterior moments of every symbol by direct per-symbol LMMSE over the full
/// stacked system: 1/v_post = 1/v_prio + h^H V_xi^{-1} h and
/// m_post = v_post (m_prio/v_prio + h^H V_xi^{-1}(y - H m_prio + h m_prio)).
/// Intended for small verification instances only.
inline PosteriorBlock block_lmmse_oracle(const Eigen::VectorXcd& y,
                                         const Eigen::MatrixXcd& hconv,
                                         const SymbolPriors& priors,
                                         double n0) {
  if (y.size() != hconv.rows())
    throw std::invalid_argument("block_lmmse_oracle: observation size mismatch");
  if (hconv.cols() != static_cast<Eigen::Index>(priors.var.size()))
    throw std::invalid_argument("block_lmmse_oracle: prior count mismatch");
  if (!(n0 > 0.0))
    throw std::invalid_argument("block_lmmse_oracle: N0 must be positive");

  const Eigen::MatrixXcd full = detail::full_input_covariance(hconv, priors, n0);
  Eigen::VectorXcd mean_all(hconv.cols());
  for (Eigen::Index s = 0; s < hconv.cols(); ++s)
    mean_all(s) = priors.mean[static_cast<std::size_t>(s)];
  const Eigen::VectorXcd base_resid = y - hconv * mean_all;

  PosteriorBlock out;
  out.mean.resize(static_cast<std::size_t>(hconv.cols()));
  out.var.resize(static_cast<std::size_t>(hconv.cols()));
  for (Eigen::Index s = 0; s < hconv.cols(); ++s) {
    const Eigen::VectorXcd h = hconv.col(s);
    const double v_prio = detail::floored(priors.var[static_cast<std::size_t>(s)]);
    Eigen::MatrixXcd v_xi = full - v_prio * h * h.adjoint();
    symmetrize(v_xi);
    Eigen::LLT<Eigen::MatrixXcd> llt(v_xi);
    if (llt.info() != Eigen::Success)
      throw SingularMatrixError("block_lmmse_oracle: singular V_xi");
    const Eigen::VectorXcd u = llt.solve(h);
    const double g = u.dot(h).real();
    const double v_post = 1.0 / (1.0 / v_prio + g);
    const cplx m_post =
        v_post * (mean_all(s) / v_prio + u.dot(base_resid + h * mean_all(s)));
    out.mean[static_cast<std::size_t>(s)] = m_post;
    out.var[static_cast<std::size_t>(s)] = v_post;
  }
  return out;
}

}  // namespace turboeq

#endif  // TURBOEQ_WP_BRIDGE_HPP
