#ifndef TURBOEQ_SIM_HPP
#define TURBOEQ_SIM_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "turboeq/channel.hpp"
#include "turboeq/coding.hpp"
#include "turboeq/common.hpp"
#include "turboeq/constellation.hpp"
#include "turboeq/gmp.hpp"
#include "turboeq/rng.hpp"
#include "turboeq/turbo.hpp"
#include "turboeq/wp_bridge.hpp"

namespace turboeq {

struct SimConfig {
  std::string scenario = "default";
  int n_t = 1;
  int n_r = 1;
  int taps = 1;
  int alphabet_order = 2;
  int gen0 = 7;
  int gen1 = 5;
  int n_info = 4096;
  std::vector<double> snr_db;
  std::string snr_mode = "esn0";  // "esn0" or "ebn0"
  int iterations = 1;
  long max_blocks = 500;
  long target_errors = 100;
  std::uint64_t seed = 1;
  std::string channel = "rayleigh";  // "rayleigh" or "static"
  std::vector<cplx> static_taps;
  int threads = 1;
  bool record_timing = true;
};

inline void validate(const SimConfig& cfg) {
  if (cfg.snr_db.empty())
    throw std::invalid_argument("SimConfig: empty SNR grid");
  for (double s : cfg.snr_db)
    if (!std::isfinite(s))
      throw std::invalid_argument("SimConfig: SNR grid must be finite");
  if (cfg.max_blocks < 1)
    throw std::invalid_argument("SimConfig: max_blocks must be >= 1");
  if (cfg.snr_mode != "esn0" && cfg.snr_mode != "ebn0")
    throw std::invalid_argument("SimConfig: snr_mode must be esn0 or ebn0");
  if (cfg.channel != "rayleigh" && cfg.channel != "static")
    throw std::invalid_argument("SimConfig: channel must be rayleigh or static");
  if (cfg.channel == "static" && static_cast<int>(cfg.static_taps.size()) != cfg.taps)
    throw std::invalid_argument("SimConfig: static_taps length must equal taps");
  if (cfg.channel == "static" && (cfg.n_t != 1 || cfg.n_r != 1))
    throw std::invalid_argument("SimConfig: static channel is single-antenna");
  if (cfg.threads < 1)
    throw std::invalid_argument("SimConfig: threads must be >= 1");
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path);
  nlohmann::json j;
  in >> j;

  static const std::set<std::string> known = {
      "scenario", "nt",         "nr",            "taps",   "alphabet",
      "code",     "info_bits",  "snr_db",        "snr_mode", "iterations",
      "max_blocks", "target_errors", "seed",     "channel", "static_taps",
      "threads"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw std::invalid_argument("load_config: unknown key \"" + key + "\"");

  SimConfig cfg;
  cfg.scenario = j.value("scenario", cfg.scenario);
  cfg.n_t = j.value("nt", cfg.n_t);
  cfg.n_r = j.value("nr", cfg.n_r);
  cfg.taps = j.value("taps", cfg.taps);
  cfg.alphabet_order = j.value("alphabet", cfg.alphabet_order);
  if (j.contains("code")) {
    cfg.gen0 = j["code"].at(0).get<int>();
    cfg.gen1 = j["code"].at(1).get<int>();
  }
  cfg.n_info = j.value("info_bits", cfg.n_info);
  if (j.contains("snr_db"))
    cfg.snr_db = j["snr_db"].get<std::vector<double>>();
  cfg.snr_mode = j.value("snr_mode", cfg.snr_mode);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.max_blocks = j.value("max_blocks", cfg.max_blocks);
  cfg.target_errors = j.value("target_errors", cfg.target_errors);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.channel = j.value("channel", cfg.channel);
  if (j.contains("static_taps"))
    for (const auto& t : j["static_taps"])
      cfg.static_taps.push_back(parse_complex(t.get<std::string>()));
  cfg.threads = j.value("threads", cfg.threads);
  validate(cfg);
  return cfg;
}

inline TurboConfig make_turbo_config(const SimConfig& cfg) {
  TurboConfig tc;
  tc.iterations = cfg.iterations;
  tc.alphabet = build_alphabet(cfg.alphabet_order);
  tc.code = make_code(cfg.gen0, cfg.gen1);
  tc.n_t = cfg.n_t;
  tc.n_r = cfg.n_r;
  tc.n_info = cfg.n_info;
  validate(tc);
  return tc;
}

/// Offset from Eb/N0 to Es/N0 in dB: every one of the N*N_t unit-energy
/// symbols is paid for by n_info information bits, tail and padding included.
inline double ebn0_to_esn0_offset_db(const TurboConfig& tc) {
  return 10.0 * std::log10(static_cast<double>(tc.n_info) /
                           (static_cast<double>(tc.blocklen()) * tc.n_t));
}

inline double point_esn0_db(const SimConfig& cfg, const TurboConfig& tc,
                            double snr_db) {
  return cfg.snr_mode == "ebn0" ? snr_db + ebn0_to_esn0_offset_db(tc) : snr_db;
}

struct BerRecord {
  std::string scenario;
  double snr_db = 0.0;
  int iteration = 0;
  long blocks = 0;
  long bits = 0;
  long errors = 0;
  double ber = 0.0;
  double seconds = 0.0;
};

inline void write_csv(std::ostream& os, const std::vector<BerRecord>& records,
                      const std::vector<std::string>& comments = {}) {
  for (const std::string& c : comments) os << "# " << c << "\n";
  os << "scenario,snr_db,iteration,blocks,bits,errors,ber,seconds\n";
  char buf[160];
  for (const BerRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%d,%ld,%ld,%ld,%.10e,%.3f",
                  r.scenario.c_str(), r.snr_db, r.iteration, r.blocks, r.bits,
                  r.errors, r.ber, r.seconds);
    os << buf << "\n";
  }
}

inline void write_csv(const std::string& path,
                      const std::vector<BerRecord>& records,
                      const std::vector<std::string>& comments = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  write_csv(out, records, comments);
}

namespace detail {

inline ChannelRealization block_channel(const SimConfig& cfg,
                                        std::uint64_t key) {
  if (cfg.channel == "static") return static_channel(cfg.static_taps);
  RngStream rng(cfg.seed, key, StreamPurpose::Channel);
  return generate_rayleigh(cfg.n_t, cfg.n_r, cfg.taps, rng);
}

inline std::vector<std::uint8_t> block_info_bits(const SimConfig& cfg,
                                                 const TurboConfig& tc,
                                                 std::uint64_t key) {
  RngStream rng(cfg.seed, key, StreamPurpose::Data);
  std::vector<std::uint8_t> info(static_cast<std::size_t>(tc.n_info));
  for (auto& b : info) b = static_cast<std::uint8_t>(rng.bit());
  return info;
}

/// Errors per turbo iteration for one transport block.
inline std::vector<long> run_turbo_block(const SimConfig& cfg,
                                         const TurboConfig& tc, double n0,
                                         std::uint64_t key) {
  const ChannelRealization ch = block_channel(cfg, key);
  const std::vector<std::uint8_t> info = block_info_bits(cfg, tc, key);
  RngStream il_rng(cfg.seed, key, StreamPurpose::Interleaver);
  const Interleaver il =
      make_interleaver(static_cast<std::size_t>(tc.n_coded()), il_rng);
  const TxFrame frame = build_frame(info, tc, il);
  RngStream noise_rng(cfg.seed, key, StreamPurpose::Noise);
  const Eigen::MatrixXcd y = transmit(frame.symbols, ch, n0, noise_rng);
  const TurboResult res = turbo_decode(y, ch, tc, n0, il, &frame);
  std::vector<long> errs(res.trace.size());
  for (std::size_t i = 0; i < res.trace.size(); ++i)
    errs[i] = res.trace[i].info_errors;
  return errs;
}

inline long run_mfb_block(const SimConfig& cfg, const TurboConfig& tc,
                          double n0, std::uint64_t key) {
  const ChannelRealization ch = block_channel(cfg, key);
  const std::vector<std::uint8_t> info = block_info_bits(cfg, tc, key);
  RngStream il_rng(cfg.seed, key, StreamPurpose::Interleaver);
  const Interleaver il =
      make_interleaver(static_cast<std::size_t>(tc.n_coded()), il_rng);
  const TxFrame frame = build_frame(info, tc, il);
  RngStream noise_rng(cfg.seed, key, StreamPurpose::Noise);
  const std::vector<std::uint8_t> hard =
      mfb_decode(frame, ch, tc, n0, il, noise_rng);
  long errs = 0;
  for (std::size_t i = 0; i < info.size(); ++i) errs += hard[i] != info[i];
  return errs;
}

/// Runs `body(block_index)` for blocks in fixed-size waves until max_blocks
/// or the stop predicate (checked between waves on in-order reduced results)
/// is satisfied. Results are reduced in block order regardless of thread
/// schedule, so output is deterministic for a given seed.
template <typename Body, typename Reduce, typename Stop>
long run_waves(long max_blocks, int threads, Body&& body, Reduce&& reduce,
               Stop&& stop) {
  constexpr long kWave = 32;
  long done = 0;
  while (done < max_blocks) {
    const long count = std::min(kWave, max_blocks - done);
    using Result = decltype(body(0L));
    std::vector<Result> results(static_cast<std::size_t>(count));
    if (threads <= 1) {
      for (long i = 0; i < count; ++i)
        results[static_cast<std::size_t>(i)] = body(done + i);
    } else {
      std::vector<std::thread> pool;
      std::atomic<long> next{0};
      const int n_workers = static_cast<int>(
          std::min<long>(threads, count));
      for (int w = 0; w < n_workers; ++w)
        pool.emplace_back([&] {
          for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1))
            results[static_cast<std::size_t>(i)] = body(done + i);
        });
      for (auto& t : pool) t.join();
    }
    for (long i = 0; i < count; ++i)
      reduce(results[static_cast<std::size_t>(i)]);
    done += count;
    if (stop()) break;
  }
  return done;
}

inline std::uint64_t block_key(std::size_t point, long block) {
  return (static_cast<std::uint64_t>(point) << 40) |
         static_cast<std::uint64_t>(block);
}

}  // namespace detail

/// Monte-Carlo BER of the iterative receiver over independent blocks, one
/// record per (SNR point, iteration). A point stops early once the
/// final-iteration error count reaches target_errors; counters are
/// accumulated before the stop check, so early stopping never biases BER.
inline std::vector<BerRecord> run_ber_sweep(const SimConfig& cfg) {
  validate(cfg);
  const TurboConfig tc = make_turbo_config(cfg);
  std::vector<BerRecord> out;
  for (std::size_t p = 0; p < cfg.snr_db.size(); ++p) {
    const double esn0_db = point_esn0_db(cfg, tc, cfg.snr_db[p]);
    const double n0 = db_to_linear(-esn0_db);
    std::vector<long> errors(static_cast<std::size_t>(cfg.iterations), 0);

    const auto t0 = std::chrono::steady_clock::now();
    const long blocks = detail::run_waves(
        cfg.max_blocks, cfg.threads,
        [&](long b) {
          return detail::run_turbo_block(cfg, tc, n0, detail::block_key(p, b));
        },
        [&](const std::vector<long>& errs) {
          for (std::size_t i = 0; i < errs.size(); ++i) errors[i] += errs[i];
        },
        [&] { return errors.back() >= cfg.target_errors; });
    const double seconds =
        cfg.record_timing
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count()
            : 0.0;

    const long bits = blocks * cfg.n_info;
    for (int it = 0; it < cfg.iterations; ++it) {
      BerRecord r;
      r.scenario = cfg.scenario;
      r.snr_db = cfg.snr_db[p];
      r.iteration = it + 1;
      r.blocks = blocks;
      r.bits = bits;
      r.errors = errors[static_cast<std::size_t>(it)];
      r.ber = static_cast<double>(r.errors) / static_cast<double>(bits);
      r.seconds = seconds;
      out.push_back(std::move(r));
    }
  }
  return out;
}

/// Genie matched-filter baseline under the same block/seed schedule.
inline std::vector<BerRecord> run_mfb(const SimConfig& cfg) {
  validate(cfg);
  const TurboConfig tc = make_turbo_config(cfg);
  std::vector<BerRecord> out;
  for (std::size_t p = 0; p < cfg.snr_db.size(); ++p) {
    const double esn0_db = point_esn0_db(cfg, tc, cfg.snr_db[p]);
    const double n0 = db_to_linear(-esn0_db);
    long errors = 0;

    const auto t0 = std::chrono::steady_clock::now();
    const long blocks = detail::run_waves(
        cfg.max_blocks, cfg.threads,
        [&](long b) {
          return detail::run_mfb_block(cfg, tc, n0, detail::block_key(p, b));
        },
        [&](long errs) { errors += errs; },
        [&] { return errors >= cfg.target_errors; });
    const double seconds =
        cfg.record_timing
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count()
            : 0.0;

    BerRecord r;
    r.scenario = cfg.scenario;
    r.snr_db = cfg.snr_db[p];
    r.iteration = 1;
    r.blocks = blocks;
    r.bits = blocks * cfg.n_info;
    r.errors = errors;
    r.ber = static_cast<double>(errors) / static_cast<double>(r.bits);
    r.seconds = seconds;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Identity suite: cross-checks of the message-passing equalizer against the
// brute-force constructions on random small instances.
// ---------------------------------------------------------------------------

struct IdentityResult {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  long trials = 0;
  bool pass() const { return max_rel_err < tolerance; }
};

struct IdentityReport {
  std::vector<IdentityResult> results;
  bool all_pass() const {
    for (const auto& r : results)
      if (!r.pass()) return false;
    return !results.empty();
  }
};

namespace detail {

inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max(std::fabs(b), 1e-6);
}

inline double rel_err(cplx a, cplx b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-6);
}

struct RandomInstance {
  ChannelRealization ch;
  StackedChannel st;
  SymbolPriors priors;
  Eigen::MatrixXcd y;
  double n0 = 1.0;
  int n = 1;
};

inline RandomInstance draw_instance(RngStream& rng) {
  RandomInstance ins;
  const int nt = 1 + static_cast<int>(rng.uniform_below(2));
  const int nr = 1 + static_cast<int>(rng.uniform_below(2));
  const int len = 1 + static_cast<int>(rng.uniform_below(3));
  ins.n = 1 + static_cast<int>(rng.uniform_below(8));
  ins.n0 = std::pow(10.0, -2.0 + 3.0 * rng.uniform());  // [0.01, 10]
  ins.ch = generate_rayleigh(nt, nr, len, rng);
  ins.st = build_stacked(ins.ch, ins.n);

  const int n_sym = ins.n * nt;
  ins.priors.mean.resize(static_cast<std::size_t>(n_sym));
  ins.priors.var.resize(static_cast<std::size_t>(n_sym));
  Eigen::MatrixXcd x(nt, ins.n);
  for (int s = 0; s < n_sym; ++s) {
    ins.priors.mean[static_cast<std::size_t>(s)] = rng.cgaussian(1.0);
    ins.priors.var[static_cast<std::size_t>(s)] = 0.05 + 1.95 * rng.uniform();
  }
  for (int k = 0; k < ins.n; ++k)
    for (int j = 0; j < nt; ++j) x(j, k) = rng.cgaussian(1.0);
  ins.y = transmit(x, ins.ch, ins.n0, rng);
  return ins;
}

inline Eigen::MatrixXcd random_pd(int dim, RngStream& rng) {
  Eigen::MatrixXcd g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = rng.cgaussian(1.0);
  Eigen::MatrixXcd out =
      g * g.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(dim, dim);
  symmetrize(out);
  return out;
}

inline Eigen::MatrixXcd random_matrix(int rows, int cols, RngStream& rng) {
  Eigen::MatrixXcd a(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a(r, c) = rng.cgaussian(1.0);
  return a;
}

inline Eigen::VectorXcd random_vector(int dim, RngStream& rng) {
  Eigen::VectorXcd v(dim);
  for (int r = 0; r < dim; ++r) v(r) = rng.cgaussian(1.0);
  return v;
}

}  // namespace detail

/// GMP equalizer vs direct block-LMMSE posteriors.
inline IdentityResult identity_gmp_vs_lmmse(std::uint64_t seed, long trials) {
  IdentityResult res{"gmp-vs-block-lmmse", 0.0, 1e-8, trials};
  RngStream rng(seed, 1, StreamPurpose::Generic);
  for (long t = 0; t < trials; ++t) {
    const detail::RandomInstance ins = detail::draw_instance(rng);
    const StateSpace ss = make_state_space(ins.ch, ins.n, ins.n0);
    const PosteriorBlock gmp = equalize(ss, ins.y, ins.priors);
    const PosteriorBlock ora = block_lmmse_oracle(
        stack_columns(ins.y), ins.st.hconv, ins.priors, ins.n0);
    for (std::size_t s = 0; s < gmp.mean.size(); ++s) {
      res.max_rel_err =
          std::max(res.max_rel_err, detail::rel_err(gmp.mean[s], ora.mean[s]));
      res.max_rel_err =
          std::max(res.max_rel_err, detail::rel_err(gmp.var[s], ora.var[s]));
    }
  }
  return res;
}

/// Posterior-to-WP transform composed with the block-LMMSE oracle vs the
/// direct interference-cancelling construction.
inline IdentityResult identity_wp_bridge(std::uint64_t seed, long trials) {
  IdentityResult res{"wp-bridge", 0.0, 1e-8, trials};
  RngStream rng(seed, 2, StreamPurpose::Generic);
  for (long t = 0; t < trials; ++t) {
    const detail::RandomInstance ins = detail::draw_instance(rng);
    const Eigen::VectorXcd ys = stack_columns(ins.y);
    const PosteriorBlock post =
        block_lmmse_oracle(ys, ins.st.hconv, ins.priors, ins.n0);
    for (std::size_t s = 0; s < post.mean.size(); ++s) {
      const WpParams direct = wp_direct_oracle(
          ys, ins.st.hconv, ins.priors, ins.n0, static_cast<Eigen::Index>(s));
      const auto bridged = wp_from_posteriors(
          SymbolMoments{post.mean[s], post.var[s]},
          SymbolMoments{ins.priors.mean[s],
                        std::max(ins.priors.var[s], kVarFloor)});
      if (!bridged) {
        // No extrinsic information implies a vanishing direct-oracle gain.
        res.max_rel_err = std::max(res.max_rel_err, std::fabs(direct.mu));
        continue;
      }
      res.max_rel_err =
          std::max(res.max_rel_err, detail::rel_err(bridged->x_hat, direct.x_hat));
      res.max_rel_err =
          std::max(res.max_rel_err, detail::rel_err(bridged->mu, direct.mu));
      res.max_rel_err = std::max(res.max_rel_err,
                                 detail::rel_err(bridged->sigma2, direct.sigma2));
    }
  }
  return res;
}

/// Composite update rules vs the same update composed from basic rules.
inline IdentityResult identity_composite_vs_basic(std::uint64_t seed,
                                                  long trials) {
  IdentityResult res{"composite-vs-basic", 0.0, 1e-10, trials};
  RngStream rng(seed, 3, StreamPurpose::Generic);
  for (long t = 0; t < trials; ++t) {
    const int d = 1 + static_cast<int>(rng.uniform_below(4));
    const int r = 1 + static_cast<int>(rng.uniform_below(3));

    {
      GaussianMV msg{detail::random_vector(d, rng), detail::random_pd(d, rng)};
      const Eigen::MatrixXcd a = detail::random_matrix(r, d, rng);
      const Eigen::VectorXcd yv = detail::random_vector(r, rng);
      const Eigen::MatrixXcd vy = detail::random_pd(r, rng);

      const GaussianMV fast = composite_forward(msg, a, yv, vy);
      const GaussianW branch = affine_bwd(a, to_precision(GaussianMV{yv, vy}));
      const GaussianMV slow =
          to_moments(equality_combine(to_precision(msg), branch));
      res.max_rel_err =
          std::max(res.max_rel_err, (fast.m - slow.m).cwiseAbs().maxCoeff());
      res.max_rel_err =
          std::max(res.max_rel_err, (fast.V - slow.V).cwiseAbs().maxCoeff());
    }
    {
      GaussianW msg;
      msg.W = detail::random_pd(d, rng);
      msg.Wm = detail::random_vector(d, rng);
      const Eigen::MatrixXcd a = detail::random_matrix(d, r, rng);
      const Eigen::VectorXcd mu = detail::random_vector(r, rng);
      const Eigen::MatrixXcd wu = detail::random_pd(r, rng);

      const GaussianW fast = composite_backward(msg, a, mu, wu);
      const GaussianMV u_out = affine_fwd(a, to_moments(GaussianW{wu, wu * mu}));
      const GaussianW slow = to_precision(sum_bwd(to_moments(msg), u_out));
      res.max_rel_err =
          std::max(res.max_rel_err, (fast.W - slow.W).cwiseAbs().maxCoeff());
      res.max_rel_err =
          std::max(res.max_rel_err, (fast.Wm - slow.Wm).cwiseAbs().maxCoeff());
    }
  }
  return res;
}

/// End-to-end single-symbol SISO check: the full equalize + WP + demap chain
/// must coincide with the closed-form AWGN demapper. Returns one result for
/// BPSK against 4*Re{conj(h)*y}/N0 and one for 16-QAM against the
/// matched-filter demapper, each with its own tolerance.
inline std::pair<IdentityResult, IdentityResult> identity_single_symbol(
    std::uint64_t seed, long trials) {
  IdentityResult res_b{"single-symbol-bpsk", 0.0, 1e-9, trials};
  IdentityResult res_q{"single-symbol-16qam", 0.0, 1e-8, trials};
  RngStream rng(seed, 4, StreamPurpose::Generic);
  const Alphabet bpsk = build_alphabet(2);
  const Alphabet qam16 = build_alphabet(16);
  for (long t = 0; t < trials; ++t) {
    const cplx h = rng.cgaussian(1.0);
    const double n0 = std::pow(10.0, -1.0 + 2.0 * rng.uniform());  // [0.1, 10]
    const cplx y = h * rng.cgaussian(1.0) + rng.cgaussian(n0);
    if (std::norm(h) < 1e-6) continue;

    ChannelRealization ch;
    ch.taps.emplace_back(Eigen::MatrixXcd::Constant(1, 1, h));
    const StateSpace ss = make_state_space(ch, 1, n0);
    Eigen::MatrixXcd ym(1, 1);
    ym(0, 0) = y;
    SymbolPriors priors;
    priors.mean = {cplx{0.0, 0.0}};
    priors.var = {1.0};
    const PosteriorBlock post = equalize(ss, ym, priors);
    const auto wp = wp_from_posteriors(SymbolMoments{post.mean[0], post.var[0]},
                                       SymbolMoments{{0.0, 0.0}, 1.0});
    if (!wp) {
      res_b.max_rel_err = std::max(res_b.max_rel_err, 1.0);
      res_q.max_rel_err = std::max(res_q.max_rel_err, 1.0);
      continue;
    }

    const std::vector<double> zero_b{0.0};
    const std::vector<double> lb = extrinsic_bit_llrs(*wp, zero_b, bpsk);
    const double ref = 4.0 * (std::conj(h) * y).real() / n0;
    res_b.max_rel_err = std::max(
        res_b.max_rel_err, std::fabs(lb[0] - ref) / std::max(std::fabs(ref), 1.0));

    const std::vector<double> zero_q(4, 0.0);
    const std::vector<double> lq = extrinsic_bit_llrs(*wp, zero_q, qam16);
    const cplx z = std::conj(h) * y / std::norm(h);
    const std::vector<double> lref =
        awgn_demapper_llrs(z, n0 / std::norm(h), qam16);
    for (int q = 0; q < 4; ++q)
      res_q.max_rel_err =
          std::max(res_q.max_rel_err,
                   std::fabs(lq[static_cast<std::size_t>(q)] -
                             lref[static_cast<std::size_t>(q)]) /
                       std::max(std::fabs(lref[static_cast<std::size_t>(q)]), 1.0));
  }
  return {res_b, res_q};
}

inline IdentityReport run_identity_suite(std::uint64_t seed, long trials) {
  IdentityReport report;
  if (trials <= 0) return report;
  report.results.push_back(identity_gmp_vs_lmmse(seed, trials));
  report.results.push_back(identity_wp_bridge(seed, trials));
  report.results.push_back(identity_composite_vs_basic(seed, trials));
  const auto [bpsk, qam16] = identity_single_symbol(seed, trials);
  report.results.push_back(bpsk);
  report.results.push_back(qam16);
  return report;
}

// ---------------------------------------------------------------------------
// Runtime scaling of the equalizer alone.
// ---------------------------------------------------------------------------

struct ScalingPoint {
  int n = 0;
  double seconds = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  std::vector<double> ratios;  // points[i+1].seconds / points[i].seconds
};

/// Times forward + backward + extraction at N = base_n * factor for each
/// factor; best-of-reps wall time per configuration.
inline ScalingReport run_scaling_probe(int base_n,
                                       const std::vector<int>& factors,
                                       int reps = 5, std::uint64_t seed = 1) {
  if (base_n < 1) throw std::invalid_argument("run_scaling_probe: bad base_n");
  ScalingReport report;
  RngStream rng(seed, 7, StreamPurpose::Generic);
  const int nt = 2, nr = 2, len = 3;
  const ChannelRealization ch = generate_rayleigh(nt, nr, len, rng);

  for (int f : factors) {
    const int n = base_n * f;
    Eigen::MatrixXcd x(nt, n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < nt; ++j) x(j, k) = rng.cgaussian(1.0);
    const double n0 = 0.5;
    const Eigen::MatrixXcd y = transmit(x, ch, n0, rng);
    SymbolPriors priors;
    priors.mean.assign(static_cast<std::size_t>(n) * nt, cplx{0.0, 0.0});
    priors.var.assign(static_cast<std::size_t>(n) * nt, 1.0);
    const StateSpace ss = make_state_space(ch, n, n0);

    double best = std::numeric_limits<double>::infinity();
    volatile double sink = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const PosteriorBlock post = equalize(ss, y, priors);
      const auto t1 = std::chrono::steady_clock::now();
      sink = sink + post.var[0];
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    report.points.push_back({n, best});
  }
  for (std::size_t i = 1; i < report.points.size(); ++i)
    report.ratios.push_back(report.points[i].seconds /
                            report.points[i - 1].seconds);
  return report;
}

}  // namespace turboeq

#endif  // TURBOEQ_SIM_HPP
