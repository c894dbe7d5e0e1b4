#ifndef TESTS_SUPPORT_EXHAUSTIVE_MAP_HPP
#define TESTS_SUPPORT_EXHAUSTIVE_MAP_HPP

// Brute-force APP reference for short blocks: enumerate every info word,
// weight its codeword by the product of per-bit channel likelihoods and
// marginalize the exact bit posteriors. Cost is 2^n_info encodings, so keep
// n_info at or below ~12.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "turboeq/coding.hpp"
#include "turboeq/common.hpp"

namespace testsupport {

struct MapReference {
  std::vector<double> code_llrs;  // posterior ln(P0/P1) per coded bit
  std::vector<double> info_llrs;  // posterior ln(P0/P1) per info bit
};

inline MapReference exhaustive_map(std::span<const double> llrs,
                                   const turboeq::CodeSpec& code, int n_info) {
  const std::size_t n_code = llrs.size();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> c0(n_code, kNegInf), c1(n_code, kNegInf);
  std::vector<double> i0(static_cast<std::size_t>(n_info), kNegInf);
  std::vector<double> i1(static_cast<std::size_t>(n_info), kNegInf);

  std::vector<std::uint8_t> info(static_cast<std::size_t>(n_info));
  for (std::uint64_t w = 0; w < (std::uint64_t{1} << n_info); ++w) {
    for (int k = 0; k < n_info; ++k)
      info[static_cast<std::size_t>(k)] =
          static_cast<std::uint8_t>((w >> k) & 1u);
    const std::vector<std::uint8_t> cw = turboeq::encode(info, code);

    double logp = 0.0;
    for (std::size_t i = 0; i < n_code; ++i)
      logp += cw[i] == 0 ? -turboeq::softplus(-llrs[i])
                         : -turboeq::softplus(llrs[i]);

    for (std::size_t i = 0; i < n_code; ++i) {
      double& slot = cw[i] == 0 ? c0[i] : c1[i];
      slot = turboeq::detail::log_add(slot, logp);
    }
    for (int k = 0; k < n_info; ++k) {
      double& slot = info[static_cast<std::size_t>(k)] == 0
                         ? i0[static_cast<std::size_t>(k)]
                         : i1[static_cast<std::size_t>(k)];
      slot = turboeq::detail::log_add(slot, logp);
    }
  }

  MapReference ref;
  ref.code_llrs.resize(n_code);
  for (std::size_t i = 0; i < n_code; ++i) ref.code_llrs[i] = c0[i] - c1[i];
  ref.info_llrs.resize(static_cast<std::size_t>(n_info));
  for (int k = 0; k < n_info; ++k)
    ref.info_llrs[static_cast<std::size_t>(k)] =
        i0[static_cast<std::size_t>(k)] - i1[static_cast<std::size_t>(k)];
  return ref;
}

}  // namespace testsupport

#endif  // TESTS_SUPPORT_EXHAUSTIVE_MAP_HPP
