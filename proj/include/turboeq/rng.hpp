#ifndef TURBOEQ_RNG_HPP
#define TURBOEQ_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "turboeq/common.hpp"

namespace turboeq {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Purpose tags keep the per-block substreams disjoint: the channel draw of
/// block i never shares state with its data or noise draws.
enum class StreamPurpose : std::uint64_t {
  Channel = 1,
  Data = 2,
  Noise = 3,
  Interleaver = 4,
  Generic = 5,
};

/// Seeded random stream derived from (master seed, block index, purpose).
/// All sampling is hand-rolled on top of the raw 64-bit generator so results
/// do not depend on the standard library's distribution implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  RngStream(std::uint64_t master, std::uint64_t block, StreamPurpose purpose)
      : gen_(splitmix64(splitmix64(splitmix64(master) ^ block) ^
                        static_cast<std::uint64_t>(purpose))) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in (0, 1].
  double uniform() {
    const std::uint64_t r = gen_() >> 11;  // 53 high-quality bits
    return (static_cast<double>(r) + 1.0) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n), n >= 1. Rejection keeps it unbiased.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do {
      r = gen_();
    } while (r >= limit);
    return r % n;
  }

  bool bit() { return (gen_() >> 63) != 0; }

  /// N(0, 1) via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Circularly symmetric complex Gaussian CN(0, variance).
  cplx cgaussian(double variance = 1.0) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-variance * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace turboeq

#endif  // TURBOEQ_RNG_HPP
