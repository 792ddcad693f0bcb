#include "qrng/nist.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <fftw3.h>

#include "parallel.hpp"
#include "qrng/error.hpp"

namespace qrng {

namespace {

double igamc(double a, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(a, x);
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void require_bits(const BitBuffer& bits, std::size_t min_bits, const char* test) {
  if (bits.size() < min_bits)
    throw ValidationError(std::string(test) + ": needs at least " + std::to_string(min_bits) + " bits, got " +
                          std::to_string(bits.size()));
}

std::uint64_t ones_in(const BitBuffer& bits, std::size_t start, std::size_t len) {
  std::uint64_t s = 0;
  std::size_t i = 0;
  for (; i + 64 <= len; i += 64) s += static_cast<std::uint64_t>(std::popcount(bits.word_at(start + i)));
  if (i < len)
    s += static_cast<std::uint64_t>(std::popcount(bits.word_at(start + i) & ((1ULL << (len - i)) - 1)));
  return s;
}

// Cyclic overlapping counts of m-bit patterns, first bit most significant.
std::vector<std::uint64_t> pattern_counts(const BitBuffer& bits, unsigned m) {
  const std::size_t n = bits.size();
  std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
  const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
  std::uint64_t code = 0;
  for (unsigned j = 0; j + 1 < m; ++j) code = (code << 1) | static_cast<std::uint64_t>(bits[j % n]);
  for (std::size_t i = 0; i < n; ++i) {
    code = ((code << 1) | static_cast<std::uint64_t>(bits[(i + m - 1) % n])) & mask;
    ++counts[code];
  }
  return counts;
}

std::vector<std::uint64_t> marginalize(const std::vector<std::uint64_t>& counts) {
  std::vector<std::uint64_t> out(counts.size() / 2);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = counts[2 * c] + counts[2 * c + 1];
  return out;
}

double psi2(const std::vector<std::uint64_t>& counts, std::size_t n) {
  if (counts.size() <= 1) return 0.0;
  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c) * static_cast<double>(c);
  return static_cast<double>(counts.size()) / static_cast<double>(n) * sum - static_cast<double>(n);
}

double phi(const std::vector<std::uint64_t>& counts, std::size_t n) {
  double sum = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    sum += p * std::log(p);
  }
  return sum;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double frequency_test(const BitBuffer& bits) {
  require_bits(bits, 1, "frequency");
  const double n = static_cast<double>(bits.size());
  const double s = 2.0 * static_cast<double>(bits.count_ones()) - n;
  return clamp01(std::erfc(std::fabs(s) / std::sqrt(2.0 * n)));
}

double block_frequency_test(const BitBuffer& bits, std::size_t block_bits) {
  if (block_bits == 0) throw ValidationError("block_frequency: block length must be > 0");
  require_bits(bits, block_bits, "block_frequency");
  const std::size_t blocks = bits.size() / block_bits;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double pi = static_cast<double>(ones_in(bits, b * block_bits, block_bits)) / static_cast<double>(block_bits);
    chi2 += (pi - 0.5) * (pi - 0.5);
  }
  chi2 *= 4.0 * static_cast<double>(block_bits);
  return clamp01(igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0));
}

double runs_test(const BitBuffer& bits) {
  require_bits(bits, 2, "runs");
  const std::size_t n = bits.size();
  const double nd = static_cast<double>(n);
  const double pi = static_cast<double>(bits.count_ones()) / nd;
  if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(nd)) return 0.0;

  // Transitions between positions i and i+1 for i < n-1.
  std::uint64_t changes = 0;
  const auto words = bits.words();
  const std::size_t len = n - 1;
  for (std::size_t w = 0; 64 * w < len; ++w) {
    std::uint64_t diff = words[w] ^ bits.word_at(64 * w + 1);
    if (len - 64 * w < 64) diff &= (1ULL << (len - 64 * w)) - 1;
    changes += static_cast<std::uint64_t>(std::popcount(diff));
  }
  const double v = 1.0 + static_cast<double>(changes);
  const double q = pi * (1.0 - pi);
  return clamp01(std::erfc(std::fabs(v - 2.0 * nd * q) / (2.0 * std::sqrt(2.0 * nd) * q)));
}

double longest_run_test(const BitBuffer& bits) {
  require_bits(bits, 128, "longest_run");
  const std::size_t n = bits.size();
  std::size_t m = 0;
  std::size_t v0 = 0;
  std::vector<double> probs;
  if (n < 6272) {
    m = 8;
    v0 = 1;
    probs = {0.2148, 0.3672, 0.2305, 0.1875};
  } else if (n < 750000) {
    m = 128;
    v0 = 4;
    probs = {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124};
  } else {
    m = 10000;
    v0 = 10;
    probs = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
  }
  const std::size_t k = probs.size() - 1;
  const std::size_t blocks = n / m;
  std::vector<double> nu(k + 1, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t best = 0;
    std::size_t cur = 0;
    for (std::size_t i = b * m; i < (b + 1) * m; ++i) {
      cur = bits[i] ? cur + 1 : 0;
      best = std::max(best, cur);
    }
    const std::size_t idx = best < v0 ? 0 : std::min(best - v0, k);
    nu[idx] += 1.0;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double e = static_cast<double>(blocks) * probs[i];
    chi2 += (nu[i] - e) * (nu[i] - e) / e;
  }
  return clamp01(igamc(static_cast<double>(k) / 2.0, chi2 / 2.0));
}

double cumulative_sums_test(const BitBuffer& bits, bool reverse) {
  require_bits(bits, 1, "cumulative_sums");
  const std::size_t n = bits.size();
  std::int64_t s = 0;
  std::int64_t z = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s += bits[reverse ? n - 1 - i : i] ? 1 : -1;
    z = std::max(z, s < 0 ? -s : s);
  }
  const double nd = static_cast<double>(n);
  const double zd = static_cast<double>(z);
  const double sq = std::sqrt(nd);
  double s1 = 0.0;
  const auto k1_lo = static_cast<long>(std::floor((-nd / zd + 1.0) / 4.0));
  const auto k1_hi = static_cast<long>(std::floor((nd / zd - 1.0) / 4.0));
  for (long k = k1_lo; k <= k1_hi; ++k)
    s1 += normal_cdf((4.0 * k + 1.0) * zd / sq) - normal_cdf((4.0 * k - 1.0) * zd / sq);
  double s2 = 0.0;
  const auto k2_lo = static_cast<long>(std::floor((-nd / zd - 3.0) / 4.0));
  for (long k = k2_lo; k <= k1_hi; ++k)
    s2 += normal_cdf((4.0 * k + 3.0) * zd / sq) - normal_cdf((4.0 * k + 1.0) * zd / sq);
  return clamp01(1.0 - s1 + s2);
}

double dft_test(const BitBuffer& bits) {
  require_bits(bits, 2, "dft");
  const std::size_t n = bits.size();
  const std::size_t half = n / 2;
  auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (half + 1)));
  if (!in || !out) {
    fftw_free(in);
    fftw_free(out);
    throw Error("dft: allocation failed");
  }
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) in[i] = bits[i] ? 1.0 : -1.0;
  fftw_execute(plan);
  const double nd = static_cast<double>(n);
  const double threshold = std::sqrt(std::log(1.0 / 0.05) * nd);
  std::size_t below = 0;
  for (std::size_t i = 0; i < half; ++i)
    if (std::hypot(out[i][0], out[i][1]) < threshold) ++below;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  const double n0 = 0.95 * nd / 2.0;
  const double d = (static_cast<double>(below) - n0) / std::sqrt(nd * 0.95 * 0.05 / 4.0);
  return clamp01(std::erfc(std::fabs(d) / std::numbers::sqrt2));
}

std::pair<double, double> serial_test(const BitBuffer& bits, unsigned m) {
  if (m < 2 || m > 24) throw ValidationError("serial: pattern length must lie in [2,24]");
  require_bits(bits, m, "serial");
  const std::size_t n = bits.size();
  const auto c0 = pattern_counts(bits, m);
  const auto c1 = marginalize(c0);
  const auto c2 = marginalize(c1);
  const double p0 = psi2(c0, n);
  const double p1 = psi2(c1, n);
  const double p2 = m >= 3 ? psi2(c2, n) : 0.0;
  const double d1 = p0 - p1;
  const double d2 = p0 - 2.0 * p1 + p2;
  return {clamp01(igamc(std::ldexp(1.0, static_cast<int>(m) - 2), d1 / 2.0)),
          clamp01(igamc(std::ldexp(1.0, static_cast<int>(m) - 3), d2 / 2.0))};
}

double approximate_entropy_test(const BitBuffer& bits, unsigned m) {
  if (m < 1 || m > 23) throw ValidationError("approximate_entropy: pattern length must lie in [1,23]");
  require_bits(bits, m + 1, "approximate_entropy");
  const std::size_t n = bits.size();
  const auto c_next = pattern_counts(bits, m + 1);
  const auto c_m = marginalize(c_next);
  const double apen = phi(c_m, n) - phi(c_next, n);
  const double chi2 = 2.0 * static_cast<double>(n) * (std::numbers::ln2 - apen);
  return clamp01(igamc(std::ldexp(1.0, static_cast<int>(m) - 1), chi2 / 2.0));
}

int serial_block_length(std::size_t n) noexcept {
  if (n == 0) return 0;
  const int lg = static_cast<int>(std::bit_width(n)) - 1;
  return std::min(16, lg - 3);
}

int approximate_entropy_block_length(std::size_t n) noexcept {
  if (n == 0) return 0;
  const int lg = static_cast<int>(std::bit_width(n)) - 1;
  return std::min(10, lg - 6);
}

const std::vector<std::string>& nist_row_names() {
  static const std::vector<std::string> names = {
      "frequency", "block_frequency", "cumulative_sums_forward", "cumulative_sums_reverse", "runs",
      "longest_run", "dft", "serial_1", "serial_2", "approximate_entropy"};
  return names;
}

SequenceResult nist_sequence(const BitBuffer& bits) {
  SequenceResult r;
  const std::size_t n = bits.size();
  auto add = [&](const char* name, double p) { r.p_values.emplace_back(name, p); };
  auto skip = [&](const char* name, std::string why) { r.skipped.emplace_back(name, std::move(why)); };

  if (n == 0) {
    for (const auto& name : nist_row_names()) r.skipped.emplace_back(name, "empty sequence");
    return r;
  }
  add("frequency", frequency_test(bits));
  if (n >= 128)
    add("block_frequency", block_frequency_test(bits));
  else
    skip("block_frequency", "fewer than 128 bits");
  add("cumulative_sums_forward", cumulative_sums_test(bits, false));
  add("cumulative_sums_reverse", cumulative_sums_test(bits, true));
  if (n >= 2)
    add("runs", runs_test(bits));
  else
    skip("runs", "fewer than 2 bits");
  if (n >= 128)
    add("longest_run", longest_run_test(bits));
  else
    skip("longest_run", "fewer than 128 bits");
  if (n >= 2)
    add("dft", dft_test(bits));
  else
    skip("dft", "fewer than 2 bits");
  if (const int m = serial_block_length(n); m >= 2) {
    const auto [p1, p2] = serial_test(bits, static_cast<unsigned>(m));
    add("serial_1", p1);
    add("serial_2", p2);
  } else {
    skip("serial_1", "fewer than 32 bits");
    skip("serial_2", "fewer than 32 bits");
  }
  if (const int m = approximate_entropy_block_length(n); m >= 1)
    add("approximate_entropy", approximate_entropy_test(bits, static_cast<unsigned>(m)));
  else
    skip("approximate_entropy", "fewer than 128 bits");
  return r;
}

bool TestReport::all_passed() const noexcept {
  return !tests.empty() && std::all_of(tests.begin(), tests.end(), [](const TestSummary& t) { return t.pass(); });
}

TestReport nist_subset(std::span<const BitBuffer> sequences, double alpha, unsigned threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("nist_subset: alpha must lie in (0,1)");
  if (sequences.empty()) throw ValidationError("nist_subset: no sequences");

  std::vector<SequenceResult> results(sequences.size());
  detail::parallel_for(sequences.size(), threads, [&](std::size_t i) { results[i] = nist_sequence(sequences[i]); });

  TestReport rep;
  rep.alpha = alpha;
  rep.sequences = sequences.size();
  for (const auto& name : nist_row_names()) {
    TestSummary t;
    t.name = name;
    std::string reason;
    for (const auto& r : results) {
      for (const auto& [row, p] : r.p_values)
        if (row == name) t.p_values.push_back(p);
      for (const auto& [row, why] : r.skipped)
        if (row == name && reason.empty()) reason = why;
    }
    if (t.p_values.empty()) {
      t.skipped = reason.empty() ? "not run" : reason;
      rep.tests.push_back(std::move(t));
      continue;
    }
    t.passed = static_cast<std::size_t>(
        std::count_if(t.p_values.begin(), t.p_values.end(), [&](double p) { return p >= alpha; }));
    t.proportion = static_cast<double>(t.passed) / static_cast<double>(t.p_values.size());
    std::tie(t.lo, t.hi) = proportion_range(alpha, t.p_values.size());
    t.proportion_ok = t.proportion >= t.lo && t.proportion <= t.hi;
    t.uniformity = pvalue_uniformity(t.p_values);
    t.uniformity_ok = t.uniformity.p_t >= kUniformityThreshold;
    rep.tests.push_back(std::move(t));
  }
  return rep;
}

}  // namespace qrng
