// Command-line front end: BER sweeps, matched-filter baselines, oracle
// verification batches, and equalizer runtime scaling probes.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "turboeq/sim.hpp"

namespace {

struct Overrides {
  std::uint64_t seed = 0;
  long blocks = 0;
  int iters = 0;
  int threads = 0;
  bool no_timing = false;
};

turboeq::SimConfig load_with_overrides(const std::string& config_path,
                                       const Overrides& ov, const CLI::App* sub) {
  turboeq::SimConfig cfg = turboeq::load_config(config_path);
  if (sub->count("--seed") > 0) cfg.seed = ov.seed;
  if (sub->count("--blocks") > 0) cfg.max_blocks = ov.blocks;
  if (sub->count("--iters") > 0) cfg.iterations = ov.iters;
  if (sub->count("--threads") > 0) cfg.threads = ov.threads;
  if (ov.no_timing) cfg.record_timing = false;
  turboeq::validate(cfg);
  return cfg;
}

std::vector<std::string> csv_comments(const turboeq::SimConfig& cfg,
                                      const std::string& mode) {
  const turboeq::TurboConfig tc = turboeq::make_turbo_config(cfg);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "turboeq %s scenario=%s seed=%llu iterations=%d snr_mode=%s "
                "ebn0_to_esn0_offset_db=%.4f",
                mode.c_str(), cfg.scenario.c_str(),
                static_cast<unsigned long long>(cfg.seed), cfg.iterations,
                cfg.snr_mode.c_str(), turboeq::ebn0_to_esn0_offset_db(tc));
  return {std::string(buf)};
}

void emit(const std::vector<turboeq::BerRecord>& records,
          const std::vector<std::string>& comments, const std::string& out) {
  if (out.empty())
    turboeq::write_csv(std::cout, records, comments);
  else
    turboeq::write_csv(out, records, comments);
}

void add_common(CLI::App* sub, std::string& config_path, std::string& out_path,
                Overrides& ov) {
  sub->add_option("--config", config_path, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", out_path, "output CSV path (default stdout)");
  sub->add_option("--seed", ov.seed, "override master seed");
  sub->add_option("--blocks", ov.blocks, "override max block count per point");
  sub->add_option("--iters", ov.iters, "override turbo iteration count");
  sub->add_option("--threads", ov.threads, "worker threads per SNR point");
  sub->add_flag("--no-timing", ov.no_timing,
                "write 0.000 in the seconds column for byte-reproducible CSV");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link-level simulator: graph LMMSE turbo equalizer over "
               "frequency-selective MIMO channels"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  Overrides ov;

  CLI::App* ber = app.add_subcommand("ber", "Monte-Carlo turbo BER sweep");
  add_common(ber, config_path, out_path, ov);

  CLI::App* mfb = app.add_subcommand("mfb", "matched-filter-bound baseline sweep");
  add_common(mfb, config_path, out_path, ov);

  std::uint64_t verify_seed = 1;
  long verify_trials = 1000;
  CLI::App* verify = app.add_subcommand(
      "verify", "run the oracle identity suite; nonzero exit on failure");
  verify->add_option("--seed", verify_seed, "suite seed");
  verify->add_option("--trials", verify_trials, "random instances per identity");

  int scale_base = 256;
  int scale_reps = 5;
  std::uint64_t scale_seed = 1;
  std::vector<int> scale_factors{1, 2, 4};
  CLI::App* scale =
      app.add_subcommand("scale", "equalizer runtime scaling probe");
  scale->add_option("--base", scale_base, "base block length N");
  scale->add_option("--factors", scale_factors, "N multipliers to time");
  scale->add_option("--reps", scale_reps, "repetitions, best-of reported");
  scale->add_option("--seed", scale_seed, "probe seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ber->parsed()) {
      const turboeq::SimConfig cfg = load_with_overrides(config_path, ov, ber);
      emit(turboeq::run_ber_sweep(cfg), csv_comments(cfg, "ber"), out_path);
    } else if (mfb->parsed()) {
      const turboeq::SimConfig cfg = load_with_overrides(config_path, ov, mfb);
      emit(turboeq::run_mfb(cfg), csv_comments(cfg, "mfb"), out_path);
    } else if (verify->parsed()) {
      const turboeq::IdentityReport report =
          turboeq::run_identity_suite(verify_seed, verify_trials);
      for (const auto& r : report.results)
        std::printf("%-24s trials=%-6ld max_rel_err=%.3e tol=%.0e %s\n",
                    r.name.c_str(), r.trials, r.max_rel_err, r.tolerance,
                    r.pass() ? "PASS" : "FAIL");
      if (!report.all_pass()) {
        std::fprintf(stderr, "verify: identity suite FAILED\n");
        return 1;
      }
    } else if (scale->parsed()) {
      const turboeq::ScalingReport report = turboeq::run_scaling_probe(
          scale_base, scale_factors, scale_reps, scale_seed);
      for (std::size_t i = 0; i < report.points.size(); ++i) {
        std::printf("N=%-6d seconds=%.6f", report.points[i].n,
                    report.points[i].seconds);
        if (i > 0) std::printf(" ratio=%.3f", report.ratios[i - 1]);
        std::printf("\n");
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
