#ifndef TURBOEQ_GMP_HPP
#define TURBOEQ_GMP_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "turboeq/channel.hpp"
#include "turboeq/common.hpp"

namespace turboeq {

/// Gaussian message in moment form (mean, covariance).
struct GaussianMV {
  Eigen::VectorXcd m;
  Eigen::MatrixXcd V;
};

/// Gaussian message in dual form (weight matrix, weighted mean W*m).
struct GaussianW {
  Eigen::MatrixXcd W;
  Eigen::VectorXcd Wm;
};

/// Per-symbol Gaussian priors, flat index (t-1)*N_t + j for time t = 1..N,
/// antenna j = 0..N_t-1 (column-major over the N_t x N symbol block).
struct SymbolPriors {
  std::vector<cplx> mean;
  std::vector<double> var;
};

/// Per-symbol posterior moments, same indexing as SymbolPriors.
struct PosteriorBlock {
  std::vector<cplx> mean;
  std::vector<double> var;
};

inline void symmetrize(Eigen::MatrixXcd& a) {
  a = ((a + a.adjoint()) * 0.5).eval();
}

// ---------------------------------------------------------------------------
// Basic message-passing rules. Equality nodes combine in the dual form, sum
// nodes in the moment form, and affine nodes map moments forward and weights
// backward.
// ---------------------------------------------------------------------------

inline GaussianW equality_combine(const GaussianW& a, const GaussianW& b) {
  if (a.W.rows() != b.W.rows())
    throw std::invalid_argument("equality_combine: dimension mismatch");
  return {a.W + b.W, a.Wm + b.Wm};
}

inline GaussianMV sum_fwd(const GaussianMV& a, const GaussianMV& b) {
  if (a.m.size() != b.m.size())
    throw std::invalid_argument("sum_fwd: dimension mismatch");
  return {a.m + b.m, a.V + b.V};
}

/// Backward through z = x + y: message on x from the z-message and the
/// incoming y-message.
inline GaussianMV sum_bwd(const GaussianMV& z, const GaussianMV& y) {
  if (z.m.size() != y.m.size())
    throw std::invalid_argument("sum_bwd: dimension mismatch");
  return {z.m - y.m, z.V + y.V};
}

/// Forward through y = A x.
inline GaussianMV affine_fwd(const Eigen::MatrixXcd& a, const GaussianMV& x) {
  if (a.cols() != x.m.size())
    throw std::invalid_argument("affine_fwd: dimension mismatch");
  return {a * x.m, a * x.V * a.adjoint()};
}

/// Backward through y = A x.
inline GaussianW affine_bwd(const Eigen::MatrixXcd& a, const GaussianW& y) {
  if (a.rows() != y.Wm.size())
    throw std::invalid_argument("affine_bwd: dimension mismatch");
  return {a.adjoint() * y.W * a, a.adjoint() * y.Wm};
}

inline GaussianW to_precision(const GaussianMV& x) {
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(x.V);
  if (!lu.isInvertible())
    throw SingularMatrixError("to_precision: singular covariance");
  GaussianW w;
  w.W = lu.inverse();
  symmetrize(w.W);
  w.Wm = w.W * x.m;
  return w;
}

inline GaussianMV to_moments(const GaussianW& x) {
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(x.W);
  if (!lu.isInvertible())
    throw SingularMatrixError("to_moments: singular weight matrix");
  GaussianMV mv;
  mv.V = lu.inverse();
  symmetrize(mv.V);
  mv.m = mv.V * x.Wm;
  return mv;
}

// ---------------------------------------------------------------------------
// Composite rules. Both fold one branch into a running message with a single
// inversion of the branch dimension, never of the state dimension.
// ---------------------------------------------------------------------------

/// Fold the observation y = A x + noise, noise covariance Vy, into a moment
/// message on x: B = (Vy + A V A^H)^{-1}, V' = V - V A^H B A V,
/// m' = m + V A^H B (y - A m).
inline GaussianMV composite_forward(const GaussianMV& msg,
                                    const Eigen::MatrixXcd& a,
                                    const Eigen::VectorXcd& y_obs,
                                    const Eigen::MatrixXcd& vy) {
  if (a.cols() != msg.m.size() || a.rows() != y_obs.size() ||
      vy.rows() != y_obs.size())
    throw std::invalid_argument("composite_forward: dimension mismatch");
  const Eigen::MatrixXcd av = a * msg.V;
  Eigen::MatrixXcd s = vy + av * a.adjoint();
  symmetrize(s);
  Eigen::LLT<Eigen::MatrixXcd> llt(s);
  if (llt.info() != Eigen::Success)
    throw SingularMatrixError("composite_forward: singular branch covariance");
  GaussianMV out;
  out.V = msg.V - av.adjoint() * llt.solve(av);
  symmetrize(out.V);
  out.m = msg.m + av.adjoint() * llt.solve((y_obs - a * msg.m).eval());
  return out;
}

/// Fold an incoming branch message (mean my, weight Wy) with z = x + A u into
/// a dual-form message: C = (Wy + A^H W A)^{-1}, W' = W - W A C A^H W,
/// W'm' = (I - W A C A^H)(Wm - W A my).
inline GaussianW composite_backward(const GaussianW& msg,
                                    const Eigen::MatrixXcd& a,
                                    const Eigen::VectorXcd& my_down,
                                    const Eigen::MatrixXcd& wy_down) {
  if (a.rows() != msg.Wm.size() || a.cols() != my_down.size() ||
      wy_down.rows() != my_down.size())
    throw std::invalid_argument("composite_backward: dimension mismatch");
  const Eigen::MatrixXcd wa = msg.W * a;
  Eigen::MatrixXcd s = wy_down + a.adjoint() * wa;
  symmetrize(s);
  Eigen::LLT<Eigen::MatrixXcd> llt(s);
  if (llt.info() != Eigen::Success)
    throw SingularMatrixError("composite_backward: singular branch weight");
  GaussianW out;
  out.W = msg.W - wa * llt.solve(wa.adjoint().eval());
  symmetrize(out.W);
  const Eigen::VectorXcd t = msg.Wm - wa * my_down;
  out.Wm = t - wa * llt.solve((a.adjoint() * t).eval());
  return out;
}

// ---------------------------------------------------------------------------
// State-space model of one transport block. The state stacks the last L
// symbol vectors, x_bar_k = [x_{k-J}; ...; x_k] with J = L-1; one time step
// is x_bar_{k+1} = G x_bar_k + F x_{k+1} observed through y_k = Hbar x_bar_k
// plus noise.
// ---------------------------------------------------------------------------

struct StateSpace {
  int n_t = 0;
  int n_r = 0;
  int length = 0;  // L taps
  int n = 0;       // symbols per antenna
  double n0 = 0.0;
  Eigen::MatrixXcd hbar;  // N_r x N_t*L
  Eigen::MatrixXcd g;     // shift matrix, zero except the identity above the diagonal blocks
  Eigen::MatrixXcd f;     // injection of the newest symbol vector, [0; I]

  int memory() const { return length - 1; }
  int dim() const { return n_t * length; }

  /// Prior of symbol (t, j), t 1-based; positions outside [1, N] are known
  /// zeros. Variances are floored so weight-form inversions stay well posed.
  cplx prior_mean(const SymbolPriors& p, int t, int j) const {
    if (t < 1 || t > n) return {0.0, 0.0};
    return p.mean[static_cast<std::size_t>((t - 1) * n_t + j)];
  }
  double prior_var(const SymbolPriors& p, int t, int j) const {
    if (t < 1 || t > n) return kVarFloor;
    const double v = p.var[static_cast<std::size_t>((t - 1) * n_t + j)];
    return v > kVarFloor ? v : kVarFloor;
  }

  GaussianMV prior_msg(const SymbolPriors& p, int t) const {
    GaussianMV msg;
    msg.m = Eigen::VectorXcd::Zero(n_t);
    msg.V = Eigen::MatrixXcd::Zero(n_t, n_t);
    for (int j = 0; j < n_t; ++j) {
      msg.m(j) = prior_mean(p, t, j);
      msg.V(j, j) = prior_var(p, t, j);
    }
    return msg;
  }
};

inline StateSpace make_state_space(const ChannelRealization& ch, int n,
                                   double n0) {
  if (n < 1) throw std::invalid_argument("make_state_space: N must be >= 1");
  if (!(n0 > 0.0))
    throw std::invalid_argument("make_state_space: N0 must be positive");
  StateSpace ss;
  ss.n_t = ch.n_t();
  ss.n_r = ch.n_r();
  ss.length = ch.length();
  ss.n = n;
  ss.n0 = n0;

  const int nt = ss.n_t;
  const int j = ss.memory();
  const int d = ss.dim();
  ss.hbar = Eigen::MatrixXcd::Zero(ss.n_r, d);
  for (int i = 0; i < ss.length; ++i)
    ss.hbar.block(0, (j - i) * nt, ss.n_r, nt) =
        ch.taps[static_cast<std::size_t>(i)];

  ss.g = Eigen::MatrixXcd::Zero(d, d);
  if (j > 0)
    ss.g.block(0, nt, nt * j, nt * j) =
        Eigen::MatrixXcd::Identity(nt * j, nt * j);
  ss.f = Eigen::MatrixXcd::Zero(d, nt);
  ss.f.block(nt * j, 0, nt, nt) = Eigen::MatrixXcd::Identity(nt, nt);
  return ss;
}

/// Forward (filtering) pass. Element k-1 of the result is the message into
/// building block k before the observation y_k is folded in, so it carries
/// y_1..y_{k-1} and the priors of all symbols up to x_k.
inline std::vector<GaussianMV> forward_pass(const StateSpace& ss,
                                            const Eigen::MatrixXcd& y,
                                            const SymbolPriors& priors) {
  const int total = ss.n + ss.memory();
  if (y.rows() != ss.n_r || y.cols() != total)
    throw std::invalid_argument("forward_pass: observation shape mismatch");
  const int nt = ss.n_t;
  const int d = ss.dim();
  const Eigen::MatrixXcd vy =
      ss.n0 * Eigen::MatrixXcd::Identity(ss.n_r, ss.n_r);

  GaussianMV cur;
  cur.m = Eigen::VectorXcd::Zero(d);
  cur.V = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i <= ss.memory(); ++i) {
    const int t = 1 - ss.memory() + i;
    for (int j = 0; j < nt; ++j) {
      cur.m(i * nt + j) = ss.prior_mean(priors, t, j);
      cur.V(i * nt + j, i * nt + j) = ss.prior_var(priors, t, j);
    }
  }

  std::vector<GaussianMV> fwd;
  fwd.reserve(static_cast<std::size_t>(total));
  for (int k = 1; k <= total; ++k) {
    fwd.push_back(cur);
    if (k == total) break;
    cur = composite_forward(cur, ss.hbar, y.col(k - 1), vy);
    cur = sum_fwd(affine_fwd(ss.g, cur),
                  affine_fwd(ss.f, ss.prior_msg(priors, k + 1)));
    symmetrize(cur.V);
  }
  return fwd;
}

/// Backward (smoothing) pass. Element k-1 of the result is the dual-form
/// message at building block k after y_k is folded in, so it carries
/// y_k..y_{N+J} and the priors of all symbols after x_k.
inline std::vector<GaussianW> backward_pass(const StateSpace& ss,
                                            const Eigen::MatrixXcd& y,
                                            const SymbolPriors& priors) {
  const int total = ss.n + ss.memory();
  if (y.rows() != ss.n_r || y.cols() != total)
    throw std::invalid_argument("backward_pass: observation shape mismatch");
  const int d = ss.dim();
  const Eigen::MatrixXcd wy_obs =
      Eigen::MatrixXcd::Identity(ss.n_r, ss.n_r) / ss.n0;

  GaussianW cur;
  cur.W = Eigen::MatrixXcd::Zero(d, d);
  cur.Wm = Eigen::VectorXcd::Zero(d);

  std::vector<GaussianW> bwd(static_cast<std::size_t>(total));
  for (int k = total; k >= 1; --k) {
    const GaussianMV prio = ss.prior_msg(priors, k + 1);
    Eigen::MatrixXcd wprio = Eigen::MatrixXcd::Zero(ss.n_t, ss.n_t);
    for (int j = 0; j < ss.n_t; ++j) wprio(j, j) = 1.0 / prio.V(j, j).real();
    cur = composite_backward(cur, ss.f, prio.m, wprio);
    cur = affine_bwd(ss.g, cur);
    cur = equality_combine(
        cur, affine_bwd(ss.hbar, GaussianW{wy_obs, y.col(k - 1) / ss.n0}));
    symmetrize(cur.W);
    bwd[static_cast<std::size_t>(k - 1)] = cur;
  }
  return bwd;
}

/// Combine a moment-form and a dual-form message on the same variable without
/// inverting either: with P = I + V W, V_post = P^{-1} V and
/// m_post = P^{-1} (m + V Wm), which equals (V^{-1} + W)^{-1} applied to
/// (V^{-1} m + Wm) whenever V is invertible and stays valid as W -> 0.
inline GaussianMV combine_pair(const GaussianMV& fwd, const GaussianW& bwd) {
  if (fwd.m.size() != bwd.Wm.size())
    throw std::invalid_argument("combine_pair: dimension mismatch");
  const Eigen::Index d = fwd.m.size();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(
      Eigen::MatrixXcd::Identity(d, d) + fwd.V * bwd.W);
  if (!lu.isInvertible())
    throw SingularMatrixError("combine_pair: ill-conditioned combination");
  GaussianMV post;
  post.V = lu.solve(fwd.V);
  symmetrize(post.V);
  post.m = lu.solve((fwd.m + fwd.V * bwd.Wm).eval());
  return post;
}

/// Posterior moments of every transmitted symbol. One full combine is done
/// per L building blocks (at k = L, 2L, ... and once more at k = N when L
/// does not divide N); the L symbol vectors inside each combined state are
/// read off its diagonal blocks.
inline PosteriorBlock combine_and_extract(const std::vector<GaussianMV>& fwd,
                                          const std::vector<GaussianW>& bwd,
                                          const StateSpace& ss) {
  const int total = ss.n + ss.memory();
  if (static_cast<int>(fwd.size()) != total ||
      static_cast<int>(bwd.size()) != total)
    throw std::invalid_argument("combine_and_extract: pass length mismatch");
  const int nt = ss.n_t;
  const int jmem = ss.memory();

  PosteriorBlock out;
  out.mean.assign(static_cast<std::size_t>(ss.n) * nt, cplx{0.0, 0.0});
  out.var.assign(static_cast<std::size_t>(ss.n) * nt, 0.0);

  std::vector<int> points;
  for (int k = ss.length; k <= ss.n; k += ss.length) points.push_back(k);
  if (points.empty() || points.back() != ss.n) points.push_back(ss.n);

  int next_uncovered = 1;
  for (int k : points) {
    const GaussianMV post = combine_pair(fwd[static_cast<std::size_t>(k - 1)],
                                         bwd[static_cast<std::size_t>(k - 1)]);
    const int lo = std::max(next_uncovered, k - jmem);
    for (int t = lo; t <= k; ++t) {
      const int p = (t - k + jmem) * nt;
      for (int j = 0; j < nt; ++j) {
        const std::size_t s = static_cast<std::size_t>((t - 1) * nt + j);
        out.mean[s] = post.m(p + j);
        const double v = post.V(p + j, p + j).real();
        out.var[s] = v > kVarFloor ? v : kVarFloor;
      }
    }
    next_uncovered = k + 1;
  }
  return out;
}

inline PosteriorBlock equalize(const StateSpace& ss, const Eigen::MatrixXcd& y,
                               const SymbolPriors& priors) {
  return combine_and_extract(forward_pass(ss, y, priors),
                             backward_pass(ss, y, priors), ss);
}

}  // namespace turboeq

#endif  // TURBOEQ_GMP_HPP
