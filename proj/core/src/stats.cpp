#include "qrng/stats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "qrng/error.hpp"

namespace qrng {

namespace {

std::uint64_t ones_in_prefix(const BitBuffer& bits, std::size_t len) {
  const auto words = bits.words();
  std::uint64_t s = 0;
  const std::size_t full = len / 64;
  for (std::size_t w = 0; w < full; ++w) s += static_cast<std::uint64_t>(std::popcount(words[w]));
  if (len % 64) s += static_cast<std::uint64_t>(std::popcount(words[full] & ((1ULL << (len % 64)) - 1)));
  return s;
}

// Kolmogorov survival function Q(lambda) = 2 Σ (-1)^(k-1) exp(-2 k² lambda²).
double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

std::pair<double, double> proportion_range(double alpha, std::size_t n_sequences) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("proportion_range: alpha must lie in [0,1)");
  if (n_sequences == 0) throw ValidationError("proportion_range: need at least one sequence");
  const double p = 1.0 - alpha;
  const double half = 3.0 * std::sqrt(alpha * p / static_cast<double>(n_sequences));
  return {p - half, p + half};
}

AutocorrReport autocorrelation(const BitBuffer& bits, std::size_t max_lag) {
  const std::size_t n = bits.size();
  if (max_lag == 0) throw ValidationError("autocorrelation: max_lag must be >= 1");
  if (n <= max_lag) throw ValidationError("autocorrelation: sequence shorter than max_lag + 1");
  const auto s = static_cast<double>(bits.count_ones());
  const double nd = static_cast<double>(n);
  const double mean = s / nd;
  const double var_sum = s - s * s / nd;
  if (var_sum <= 0.0) throw ValidationError("autocorrelation: constant sequence has zero variance");

  const auto words = bits.words();
  AutocorrReport rep;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    const std::size_t len = n - k;
    std::uint64_t pairs = 0;
    const std::size_t full = len / 64;
    for (std::size_t w = 0; w < full; ++w)
      pairs += static_cast<std::uint64_t>(std::popcount(words[w] & bits.word_at(64 * w + k)));
    if (len % 64)
      pairs += static_cast<std::uint64_t>(
          std::popcount(words[full] & bits.word_at(64 * full + k) & ((1ULL << (len % 64)) - 1)));
    const auto head = static_cast<double>(ones_in_prefix(bits, len));
    const double tail = s - static_cast<double>(ones_in_prefix(bits, k));
    const double num = static_cast<double>(pairs) - mean * (head + tail) + static_cast<double>(len) * mean * mean;
    rep.lags.push_back(k);
    rep.r.push_back(num / var_sum);
  }
  const double m = std::accumulate(rep.r.begin(), rep.r.end(), 0.0) / static_cast<double>(rep.r.size());
  double ss = 0.0;
  for (double r : rep.r) ss += (r - m) * (r - m);
  rep.mean = m;
  rep.stddev = rep.r.size() > 1 ? std::sqrt(ss / static_cast<double>(rep.r.size() - 1)) : 0.0;
  return rep;
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("fit_linear: x and y differ in length");
  if (x.size() < 2) throw ValidationError("fit_linear: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit_linear: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

double dip_visibility(std::span<const DipPoint> scan) {
  if (scan.empty()) throw ValidationError("dip_visibility: empty scan");
  std::vector<DipPoint> pts(scan.begin(), scan.end());
  std::stable_sort(pts.begin(), pts.end(),
                   [](const DipPoint& p, const DipPoint& q) { return std::fabs(p.delay_ps) > std::fabs(q.delay_ps); });
  const std::size_t outer = std::max<std::size_t>(1, (pts.size() + 4) / 5);
  double baseline = 0.0;
  for (std::size_t i = 0; i < outer; ++i) baseline += pts[i].count;
  baseline /= static_cast<double>(outer);
  if (!(baseline > 0.0)) throw ValidationError("dip_visibility: baseline must be positive");
  double c_min = pts[0].count;
  for (const auto& p : pts) c_min = std::min(c_min, p.count);
  return (baseline - c_min) / baseline;
}

Uniformity pvalue_uniformity(std::span<const double> p_values) {
  if (p_values.empty()) throw ValidationError("pvalue_uniformity: no P-values");
  std::array<double, 10> bins{};
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("pvalue_uniformity: P-value outside [0,1]");
    bins[std::min<std::size_t>(9, static_cast<std::size_t>(p * 10.0))] += 1.0;
  }
  const double n = static_cast<double>(p_values.size());
  const double expected = n / 10.0;
  double chi2 = 0.0;
  for (double b : bins) chi2 += (b - expected) * (b - expected) / expected;

  Uniformity u;
  u.p_t = boost::math::gamma_q(4.5, chi2 / 2.0);

  std::vector<double> sorted(p_values.begin(), p_values.end());
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - sorted[i]);
    d = std::max(d, sorted[i] - static_cast<double>(i) / n);
  }
  u.ks_statistic = d;
  const double rn = std::sqrt(n);
  u.ks_p_value = kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
  return u;
}

}  // namespace qrng
