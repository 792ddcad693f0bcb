#include "qrng/nist.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "qrng/error.hpp"
#include "test_support.hpp"

namespace qrng {
namespace {

struct Fixture {
  std::string name;
  BitBuffer bits;
  std::map<std::string, double> p_values;
};

std::vector<Fixture> load_fixtures() {
  std::ifstream in(QRNG_FIXTURE_DIR "/nist_fixtures.json");
  const auto j = nlohmann::json::parse(in);
  std::vector<Fixture> out;
  for (const auto& s : j.at("sequences")) {
    const std::string hex = s.at("hex");
    std::vector<std::uint8_t> bytes(hex.size() / 2);
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<std::uint8_t>(std::stoul(hex.substr(2 * i, 2), nullptr, 16));
    out.push_back({s.at("name"), BitBuffer::from_bytes(bytes, s.at("bit_len")),
                   s.at("p_values").get<std::map<std::string, double>>()});
  }
  return out;
}

TEST(Nist, FrequencyExample) {
  EXPECT_NEAR(frequency_test(BitBuffer::from_string("1011010101")), 0.527089, 1e-6);
}

TEST(Nist, AllZeroFailsFrequency) {
  const BitBuffer zeros(1'000'000);
  EXPECT_LT(frequency_test(zeros), 1e-10);
  const TestReport r = nist_subset(std::vector<BitBuffer>{zeros});
  EXPECT_FALSE(r.all_passed());
}

TEST(Nist, FixturesMatchOracle) {
  const auto fixtures = load_fixtures();
  ASSERT_EQ(fixtures.size(), 10u);
  for (const auto& f : fixtures) {
    const auto res = nist_sequence(f.bits);
    EXPECT_TRUE(res.skipped.empty()) << f.name;
    ASSERT_EQ(res.p_values.size(), f.p_values.size()) << f.name;
    for (const auto& [row, p] : res.p_values) {
      ASSERT_TRUE(f.p_values.count(row)) << row;
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      EXPECT_NEAR(p, f.p_values.at(row), 1e-4) << f.name << " " << row;
    }
  }
}

// Published results of the reference suite on the first 10^6 bits of e.
TEST(Nist, ReferenceValuesForE) {
  const auto fixtures = load_fixtures();
  const auto& e = fixtures.front();
  ASSERT_EQ(e.name, "e_expansion");
  const BitBuffer& b = e.bits;
  EXPECT_NEAR(frequency_test(b), 0.953749, 1e-5);
  EXPECT_NEAR(block_frequency_test(b, 128), 0.211072, 1e-5);
  EXPECT_NEAR(cumulative_sums_test(b, false), 0.669887, 1e-5);
  EXPECT_NEAR(cumulative_sums_test(b, true), 0.724266, 1e-5);
  EXPECT_NEAR(runs_test(b), 0.561917, 1e-5);
  EXPECT_NEAR(longest_run_test(b), 0.718945, 1e-5);
  EXPECT_NEAR(dft_test(b), 0.847187, 1e-5);
  const auto [s1, s2] = serial_test(b, 16);
  EXPECT_NEAR(s1, 0.766182, 1e-5);
  EXPECT_NEAR(s2, 0.462921, 1e-5);
  EXPECT_NEAR(approximate_entropy_test(b, 10), 0.700073, 1e-5);
}

TEST(Nist, BlockLengths) {
  EXPECT_EQ(serial_block_length(1'000'000), 16);
  EXPECT_EQ(serial_block_length(100'000), 13);
  EXPECT_EQ(approximate_entropy_block_length(1'000'000), 10);
  EXPECT_EQ(approximate_entropy_block_length(100'000), 10);
  EXPECT_EQ(approximate_entropy_block_length(10'000), 7);
}

TEST(Nist, RowOrder) {
  const std::vector<std::string> expect = {"frequency", "block_frequency", "cumulative_sums_forward",
                                           "cumulative_sums_reverse", "runs", "longest_run", "dft",
                                           "serial_1", "serial_2", "approximate_entropy"};
  EXPECT_EQ(nist_row_names(), expect);
}

TEST(Nist, ShortSequenceSkipsWithReason) {
  const auto res = nist_sequence(test::random_bits(100, 1));
  EXPECT_FALSE(res.skipped.empty());
  for (const auto& [row, reason] : res.skipped) EXPECT_FALSE(reason.empty()) << row;
}

TEST(Nist, ReportOnRandomSequences) {
  std::vector<BitBuffer> seqs;
  for (int i = 0; i < 20; ++i) seqs.push_back(test::random_bits(20'000, 500 + i));
  const TestReport r = nist_subset(seqs, 0.01);
  EXPECT_EQ(r.sequences, 20u);
  ASSERT_EQ(r.tests.size(), nist_row_names().size());
  for (const auto& t : r.tests) {
    EXPECT_EQ(t.p_values.size(), 20u) << t.name;
    const auto [lo, hi] = proportion_range(0.01, 20);
    EXPECT_DOUBLE_EQ(t.lo, lo);
    EXPECT_DOUBLE_EQ(t.hi, hi);
    EXPECT_GE(t.proportion, 0.0);
    EXPECT_LE(t.proportion, 1.0);
  }
}

TEST(Nist, ThreadCountDoesNotChangeReport) {
  std::vector<BitBuffer> seqs;
  for (int i = 0; i < 6; ++i) seqs.push_back(test::random_bits(10'000, 50 + i));
  const auto a = nist_subset(seqs, 0.01, 1);
  const auto b = nist_subset(seqs, 0.01, 4);
  ASSERT_EQ(a.tests.size(), b.tests.size());
  for (std::size_t i = 0; i < a.tests.size(); ++i) EXPECT_EQ(a.tests[i].p_values, b.tests[i].p_values);
}

TEST(Nist, EmptyInputRejected) {
  EXPECT_THROW(nist_subset(std::vector<BitBuffer>{}), ValidationError);
}

}  // namespace
}  // namespace qrng
