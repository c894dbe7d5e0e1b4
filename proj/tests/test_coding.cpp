#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "support/exhaustive_map.hpp"
#include "turboeq/coding.hpp"
#include "turboeq/rng.hpp"

using namespace turboeq;

TEST_CASE("octal generator strings expand digit by digit", "[coding]") {
  CHECK(octal_to_mask(7) == 0b111u);
  CHECK(octal_to_mask(5) == 0b101u);
  CHECK(octal_to_mask(133) == 0b1011011u);
  CHECK(octal_to_mask(171) == 0b1111001u);
  CHECK_THROWS_AS(octal_to_mask(0), std::invalid_argument);
  CHECK_THROWS_AS(octal_to_mask(8), std::invalid_argument);

  CHECK(make_code(7, 5).constraint_length == 3);
  CHECK(make_code(133, 171).constraint_length == 7);
  CHECK(make_code(7, 5).num_states() == 4);
}

TEST_CASE("encoder output for an impulse matches the textbook sequence", "[coding]") {
  const CodeSpec code = make_code(7, 5);
  const std::vector<std::uint8_t> zero(6, 0);
  const std::vector<std::uint8_t> czero = encode(zero, code);
  REQUIRE(czero.size() == 2 * (6 + 2));
  for (std::uint8_t b : czero) CHECK(b == 0);

  const std::vector<std::uint8_t> impulse{1, 0, 0, 0};
  const std::vector<std::uint8_t> c = encode(impulse, code);
  const std::vector<std::uint8_t> want{1, 1, 1, 0, 1, 1, 0, 0};
  REQUIRE(c.size() == 12);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(c[i] == want[i]);
}

TEST_CASE("feedforward encoding is linear over gf2", "[coding]") {
  const CodeSpec code = make_code(133, 171);
  RngStream rng(21, 0, StreamPurpose::Generic);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::uint8_t> a(48), b(48), s(48);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.bit();
      b[i] = rng.bit();
      s[i] = a[i] ^ b[i];
    }
    const auto ca = encode(a, code);
    const auto cb = encode(b, code);
    const auto cs = encode(s, code);
    for (std::size_t i = 0; i < cs.size(); ++i)
      CHECK(cs[i] == (ca[i] ^ cb[i]));
  }
}

TEST_CASE("interleaver permutes reversibly and reproducibly", "[coding]") {
  const Interleaver il = make_interleaver(64, std::uint64_t{9});
  std::vector<int> v(64);
  for (int i = 0; i < 64; ++i) v[static_cast<std::size_t>(i)] = i;
  const std::vector<int> w = il.interleave(v);
  CHECK(w != v);  // 64 elements, identity is vanishingly unlikely
  CHECK(il.deinterleave(w) == v);

  const Interleaver again = make_interleaver(64, std::uint64_t{9});
  CHECK(again.perm == il.perm);
  const Interleaver other = make_interleaver(64, std::uint64_t{10});
  CHECK(other.perm != il.perm);

  const Interleaver one = make_interleaver(1, std::uint64_t{3});
  CHECK(one.perm == std::vector<std::size_t>{0});

  CHECK_THROWS_AS(il.interleave(std::vector<int>(63)), std::invalid_argument);
}

TEST_CASE("app decoder reproduces exhaustive posteriors", "[coding]") {
  const CodeSpec code = make_code(7, 5);
  const int n_info = 8;
  RngStream rng(33, 0, StreamPurpose::Generic);
  const std::size_t n_code = 2 * static_cast<std::size_t>(n_info + code.memory());

  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> llrs(n_code);
    for (auto& l : llrs) l = 6.0 * rng.gaussian();

    const AppDecodeResult dec = app_decode(llrs, code);
    const testsupport::MapReference ref =
        testsupport::exhaustive_map(llrs, code, n_info);

    REQUIRE(dec.info_llrs.size() == static_cast<std::size_t>(n_info));
    for (int k = 0; k < n_info; ++k)
      CHECK(dec.info_llrs[static_cast<std::size_t>(k)] ==
            Catch::Approx(ref.info_llrs[static_cast<std::size_t>(k)])
                .margin(1e-9));
    // decoder reports extrinsic values; add the input back for the posterior
    for (std::size_t i = 0; i < n_code; ++i)
      CHECK(dec.extrinsic_code_llrs[i] + llrs[i] ==
            Catch::Approx(ref.code_llrs[i]).margin(1e-9));
  }
}

TEST_CASE("app decoder handles a longer constraint length the same way", "[coding]") {
  const CodeSpec code = make_code(133, 171);
  const int n_info = 6;
  RngStream rng(34, 0, StreamPurpose::Generic);
  const std::size_t n_code = 2 * static_cast<std::size_t>(n_info + code.memory());

  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> llrs(n_code);
    for (auto& l : llrs) l = 4.0 * rng.gaussian();
    const AppDecodeResult dec = app_decode(llrs, code);
    const testsupport::MapReference ref =
        testsupport::exhaustive_map(llrs, code, n_info);
    for (int k = 0; k < n_info; ++k)
      CHECK(dec.info_llrs[static_cast<std::size_t>(k)] ==
            Catch::Approx(ref.info_llrs[static_cast<std::size_t>(k)])
                .margin(1e-9));
  }
}

TEST_CASE("saturated noiseless llrs decode to the transmitted word", "[coding]") {
  const CodeSpec code = make_code(7, 5);
  RngStream rng(55, 0, StreamPurpose::Generic);
  std::vector<std::uint8_t> info(40);
  for (auto& b : info) b = rng.bit();
  const std::vector<std::uint8_t> cw = encode(info, code);
  std::vector<double> llrs(cw.size());
  for (std::size_t i = 0; i < cw.size(); ++i) llrs[i] = cw[i] == 0 ? 50.0 : -50.0;

  const AppDecodeResult dec = app_decode(llrs, code);
  CHECK(dec.info_bits == info);
  // every extrinsic should agree in sign with the codeword
  for (std::size_t i = 0; i < cw.size(); ++i)
    CHECK((cw[i] == 0 ? dec.extrinsic_code_llrs[i] > 0.0
                      : dec.extrinsic_code_llrs[i] < 0.0));
}

TEST_CASE("an uninformative input yields no extrinsic output", "[coding]") {
  const CodeSpec code = make_code(7, 5);
  const std::vector<double> llrs(2 * (12 + 2), 0.0);
  const AppDecodeResult dec = app_decode(llrs, code);
  for (double e : dec.extrinsic_code_llrs)
    CHECK(e == Catch::Approx(0.0).margin(1e-12));
  for (double l : dec.info_llrs) CHECK(l == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("app decoder validates its input length", "[coding]") {
  const CodeSpec code = make_code(7, 5);
  CHECK_THROWS_AS(app_decode(std::vector<double>{1.0}, code),
                  std::invalid_argument);
  CHECK_THROWS_AS(app_decode(std::vector<double>(4, 0.0), code),
                  std::invalid_argument);  // shorter than the tail
}
