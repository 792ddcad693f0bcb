#include "qrng/toeplitz.hpp"

#include <random>

#include "qrng/entropy.hpp"
#include "qrng/error.hpp"
#include "qrng/gf2_poly.hpp"
#include "test_support.hpp"

namespace qrng {
namespace {

std::string hex(const std::vector<std::uint8_t>& v) {
  static const char* d = "0123456789abcdef";
  std::string s;
  for (auto b : v) {
    s += d[b >> 4];
    s += d[b & 15];
  }
  return s;
}

// out[i] = XOR_j T[i][j]·x[j] with T[i][j] = s[i - j + n - 1], one bit at a time.
BitBuffer naive_toeplitz(const BitBuffer& s, const BitBuffer& x, std::size_t m) {
  const std::size_t n = x.size();
  BitBuffer out(m);
  for (std::size_t i = 0; i < m; ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < n; ++j) acc ^= s[i + n - 1 - j] && x[j];
    out.set(i, acc);
  }
  return out;
}

std::vector<std::uint64_t> naive_clmul(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::vector<std::uint64_t> out(a.size() + b.size(), 0);
  for (std::size_t i = 0; i < a.size() * 64; ++i) {
    if (!((a[i / 64] >> (i % 64)) & 1)) continue;
    for (std::size_t j = 0; j < b.size() * 64; ++j)
      if ((b[j / 64] >> (j % 64)) & 1) out[(i + j) / 64] ^= std::uint64_t{1} << ((i + j) % 64);
  }
  return out;
}

TEST(ChaCha20, Rfc8439BlockVector) {
  std::array<std::uint8_t, 32> key{};
  for (int i = 0; i < 32; ++i) key[i] = static_cast<std::uint8_t>(i);
  const std::array<std::uint8_t, 12> nonce = {0, 0, 0, 9, 0, 0, 0, 0x4a, 0, 0, 0, 0};
  EXPECT_EQ(hex(chacha20_keystream(key, nonce, 1, 64)),
            "10f1e7e4d13b5915500fdd1fa32071c4c7d1f4c733c068030422aa9ac3d46c4e"
            "d2826446079faa0914c2d705d98b02a2b5129cd1de164eb9cbd083e8a2503c4e");
}

TEST(ChaCha20, Rfc8439ZeroKeyVector) {
  EXPECT_EQ(hex(chacha20_keystream({}, {}, 0, 64)),
            "76b8e0ada0f13d90405d6ae55386bd28bdd219b8a08ded1aa836efcc8b770dc7"
            "da41597c5157488d7724e03fb8d84a376a43b8f41518a11cc387b669b2ee6586");
}

TEST(ExpandSeed, KeyScheduleVector) {
  const auto s = expand_seed(42, 3, 256);
  EXPECT_EQ(hex(s.s.to_bytes()), "b5ed5699022f5ca3990f02b3fc357848c5b8acdcfd79cbeb747f1bace35c384c");
}

TEST(ExpandSeed, DeterministicAndExactLength) {
  EXPECT_EQ(expand_seed(7, 0, 1001).s, expand_seed(7, 0, 1001).s);
  EXPECT_EQ(expand_seed(7, 0, 1001).s.size(), 1001u);
  EXPECT_EQ(expand_seed(7, 0, 1001).s, expand_seed(7, 0, 2000).s.slice(0, 1001));
}

TEST(ExpandSeed, Avalanche) {
  for (std::uint64_t k : {0ull, 1ull, 41ull, 0xFFFFFFFFull}) {
    const auto a = expand_seed(k, 0, 10'000).s;
    const auto b = expand_seed(k + 1, 0, 10'000).s;
    EXPECT_GE((a ^ b).count_ones(), 4000u);
  }
  EXPECT_GE((expand_seed(5, 0, 10'000).s ^ expand_seed(5, 1, 10'000).s).count_ones(), 4000u);
}

TEST(ExpandSeed, ZeroLengthRejected) { EXPECT_THROW(expand_seed(1, 0, 0), ValidationError); }

TEST(Gf2Multiply, MatchesBitLoop) {
  std::mt19937_64 gen(10);
  for (std::size_t na : {1u, 2u, 3u, 17u, 33u, 70u}) {
    for (std::size_t nb : {1u, 5u, 32u, 65u}) {
      std::vector<std::uint64_t> a(na);
      std::vector<std::uint64_t> b(nb);
      for (auto& x : a) x = gen();
      for (auto& x : b) x = gen();
      const auto expect = naive_clmul(a, b);
      EXPECT_EQ(gf2_multiply(a, b, ClmulBackend::software), expect) << na << "x" << nb;
      if (clmul_hardware_available()) EXPECT_EQ(gf2_multiply(a, b, ClmulBackend::hardware), expect);
    }
  }
}

TEST(Gf2Multiply, BackendsAgreeOnLargeOperands) {
  if (!clmul_hardware_available()) GTEST_SKIP() << "no carry-less multiply instruction";
  const auto a = test::random_bits(64 * 1500, 1);
  const auto b = test::random_bits(64 * 977, 2);
  EXPECT_EQ(gf2_multiply(a.words(), b.words(), ClmulBackend::software),
            gf2_multiply(a.words(), b.words(), ClmulBackend::hardware));
}

TEST(Toeplitz, SpecExample) {
  const ToeplitzSeed s{BitBuffer::from_string("1011")};
  const auto x = BitBuffer::from_string("110");
  EXPECT_EQ(toeplitz_multiply(s, x, 2).to_string(), "10");
  EXPECT_EQ(toeplitz_multiply_reference(s, x, 2).to_string(), "10");
}

TEST(Toeplitz, ZeroSeedGivesZero) {
  const ToeplitzSeed s{BitBuffer(100 + 60 - 1)};
  EXPECT_EQ(toeplitz_multiply(s, test::random_bits(100, 1), 60).count_ones(), 0u);
}

TEST(Toeplitz, DeltaSeedSelectsPrefix) {
  const std::size_t n = 200;
  const std::size_t m = 150;
  BitBuffer s(n + m - 1);
  s.set(n - 1, true);
  const auto x = test::random_bits(n, 2);
  EXPECT_EQ(toeplitz_multiply({s}, x, m), x.slice(0, m));
}

TEST(Toeplitz, KernelsMatchNaiveMatrix) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + gen() % 63;
    const std::size_t m = 1 + gen() % std::min<std::size_t>(32, n - 1);
    const ToeplitzSeed s{test::random_bits(n + m - 1, gen())};
    const auto x = test::random_bits(n, gen());
    const auto expect = naive_toeplitz(s.s, x, m);
    ASSERT_EQ(toeplitz_multiply(s, x, m), expect) << "n=" << n << " m=" << m;
    ASSERT_EQ(toeplitz_multiply_reference(s, x, m), expect) << "n=" << n << " m=" << m;
  }
}

TEST(Toeplitz, FastPathMatchesReferenceOnLargeBlocks) {
  const std::size_t n = 50'000;
  const std::size_t m = 47'500;
  const auto s = expand_seed(1, 0, n + m - 1);
  const auto x = test::random_bits(n, 9);
  EXPECT_EQ(toeplitz_multiply(s, x, m), toeplitz_multiply_reference(s, x, m));
}

TEST(Toeplitz, ShapeMismatch) {
  EXPECT_THROW(toeplitz_multiply({BitBuffer(10)}, BitBuffer(5), 5), ValidationError);
}

TEST(Extract, OutputLength) {
  ExtractorConfig c;
  c.block_bits = 1000;
  c.ratio = 0.95;
  EXPECT_EQ(c.output_bits(), 950u);
  EXPECT_EQ(extract(test::random_bits(2000, 1), c).size(), 1900u);
  EXPECT_EQ(extract(test::random_bits(2017, 1), c).size(), 1900u);
}

TEST(Extract, TrailingBitsDoNotMatter) {
  ExtractorConfig c;
  c.block_bits = 1000;
  const auto raw = test::random_bits(2017, 1);
  EXPECT_EQ(extract(raw, c), extract(raw.slice(0, 2000), c));
}

TEST(Extract, ShortInputRejected) {
  ExtractorConfig c;
  c.block_bits = 1000;
  EXPECT_THROW(extract(BitBuffer(999), c), ValidationError);
}

TEST(Extract, BlocksUseTheirOwnSeed) {
  ExtractorConfig c;
  c.block_bits = 500;
  c.ratio = 0.8;
  c.seed_key = 99;
  const auto raw = test::random_bits(1500, 4);
  const auto out = extract(raw, c);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto seed = expand_seed(99, k, c.seed_bits());
    EXPECT_EQ(out.slice(k * 400, 400), toeplitz_multiply_reference(seed, raw.slice(k * 500, 500), 400));
  }
}

TEST(Extract, ThreadCountDoesNotChangeOutput) {
  ExtractorConfig c;
  c.block_bits = 10'000;
  const auto raw = test::random_bits(95'000, 6);
  const auto one = extract(raw, c, 1);
  EXPECT_EQ(extract(raw, c, 3), one);
  EXPECT_EQ(extract(raw, c, 8), one);
}

TEST(Extract, Linearity) {
  ExtractorConfig c;
  c.block_bits = 4096;
  c.seed_key = 5;
  for (int i = 0; i < 20; ++i) {
    const auto x = test::random_bits(4096, 100 + i);
    const auto y = test::random_bits(4096, 200 + i);
    EXPECT_EQ(extract(x ^ y, c), extract(x, c) ^ extract(y, c));
  }
}

TEST(Extract, BiasedInputBecomesUniform) {
  BitBuffer raw(1'000'000);
  std::mt19937_64 gen(12);
  for (std::size_t i = 0; i < raw.size(); ++i) raw.set(i, (gen() % 1000) < 480);
  ExtractorConfig c;
  c.block_bits = 1'000'000;
  const auto out = extract(raw, c);
  EXPECT_GE(min_entropy_8bit(out).h_inf_per_bit, 0.97);
}

TEST(ExtractorConfig, Validation) {
  ExtractorConfig c;
  c.ratio = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.ratio = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = ExtractorConfig{};
  c.block_bits = 1;
  EXPECT_THROW(c.validate(), ValidationError);
}

}  // namespace
}  // namespace qrng
