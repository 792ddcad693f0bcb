#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qrng/bit_buffer.hpp"

namespace qrng {

/// Acceptance band (1-alpha) ± 3·sqrt(alpha(1-alpha)/n) for the fraction of
/// sequences passing a test.
std::pair<double, double> proportion_range(double alpha, std::size_t n_sequences);

struct AutocorrReport {
  std::vector<std::size_t> lags;
  std::vector<double> r;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Pearson r(k) = Σ(x_i - x̄)(x_{i+k} - x̄) / Σ(x_i - x̄)² for k = 1..max_lag,
/// with the numerator over i < N-k. Computed exactly from popcounts.
AutocorrReport autocorrelation(const BitBuffer& bits, std::size_t max_lag);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;  // 1 when y is constant
};

/// Ordinary least squares y = slope·x + intercept.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

struct DipPoint {
  double delay_ps;
  double count;
};

/// V = (baseline - min)/baseline, baseline the mean count over the 20% of
/// points with the largest |delay| (at least one point).
double dip_visibility(std::span<const DipPoint> scan);

struct Uniformity {
  double p_t = 0.0;           // 10-bin chi-squared P-value
  double ks_statistic = 0.0;  // sup |F_n(x) - x|
  double ks_p_value = 0.0;    // asymptotic Kolmogorov distribution
};

/// Goodness of fit of P-values against U(0,1).
Uniformity pvalue_uniformity(std::span<const double> p_values);

}  // namespace qrng
