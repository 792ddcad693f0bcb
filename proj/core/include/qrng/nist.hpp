#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrng/bit_buffer.hpp"
#include "qrng/stats.hpp"

namespace qrng {

// Individual SP 800-22 tests. Each returns a P-value in [0,1] and throws
// ValidationError when the sequence is too short for the test.

double frequency_test(const BitBuffer& bits);
double block_frequency_test(const BitBuffer& bits, std::size_t block_bits = 128);
double runs_test(const BitBuffer& bits);
/// Block length 8, 128 or 10^4 chosen from n as in the standard; n >= 128.
double longest_run_test(const BitBuffer& bits);
double cumulative_sums_test(const BitBuffer& bits, bool reverse);
/// Peak threshold sqrt(ln(1/0.05)·n), expected count 0.95·n/2.
double dft_test(const BitBuffer& bits);
/// Returns (P-value 1, P-value 2) for pattern length m >= 2.
std::pair<double, double> serial_test(const BitBuffer& bits, unsigned m);
double approximate_entropy_test(const BitBuffer& bits, unsigned m);

/// Pattern lengths used by nist_subset: min(16, floor(log2 n) - 3) for
/// Serial and min(10, floor(log2 n) - 6) for Approximate Entropy.
int serial_block_length(std::size_t n) noexcept;
int approximate_entropy_block_length(std::size_t n) noexcept;

/// Report row names in output order.
const std::vector<std::string>& nist_row_names();

struct SequenceResult {
  std::vector<std::pair<std::string, double>> p_values;   // row name -> P-value
  std::vector<std::pair<std::string, std::string>> skipped;  // row name -> reason
};

/// Runs every subset test on one sequence.
SequenceResult nist_sequence(const BitBuffer& bits);

struct TestSummary {
  std::string name;
  std::vector<double> p_values;  // one per sequence the test ran on
  std::size_t passed = 0;        // P >= alpha
  double proportion = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  Uniformity uniformity;
  bool proportion_ok = false;
  bool uniformity_ok = false;    // P_T >= 1e-4
  std::string skipped;           // non-empty when no sequence could run the test

  bool pass() const noexcept { return skipped.empty() && proportion_ok && uniformity_ok; }
};

struct TestReport {
  double alpha = 0.01;
  std::size_t sequences = 0;
  std::vector<TestSummary> tests;

  bool all_passed() const noexcept;
};

inline constexpr double kUniformityThreshold = 1e-4;

/// Per-sequence tests run in parallel; the report does not depend on `threads`.
TestReport nist_subset(std::span<const BitBuffer> sequences, double alpha = 0.01, unsigned threads = 1);

}  // namespace qrng
