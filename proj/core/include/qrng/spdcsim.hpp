#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qrng/stats.hpp"
#include "qrng/timetag.hpp"

namespace qrng {

/// `bits`: pairs land in (U1,D2) or (U2,D1) and all four sections are recorded.
/// `heralded_g2`: only the (U1,D2) arm is used; D2 heralds and the U1 photon is
/// routed through a virtual 50:50 split onto channels U1 and U2. D1 stays empty.
enum class SimMode : std::uint8_t { bits, heralded_g2 };

struct SimConfig {
  double pump_power_mw = 1.0;
  double pair_rate_hz_per_mw = 3.2e7;  // emitted pairs/s per mW, both pair kinds together
  double pair_bias = 0.5;              // probability that a pair lands in (U1,D2)
  std::array<double, kChannelCount> detection_efficiency = {0.16, 0.16, 0.16, 0.16};
  double jitter_sigma_ps = 300.0;  // per detector
  double dead_time_ps = 22000.0;   // non-paralyzable, per detector
  double dark_rate_hz = 500.0;     // per channel
  double duration_s = 0.3;
  std::uint64_t rng_seed = 1;
  SimMode mode = SimMode::bits;

  /// Throws ValidationError on negative rates, probabilities outside [0,1] or
  /// a non-positive duration.
  void validate() const;

  double pair_rate_hz() const noexcept { return pair_rate_hz_per_mw * pump_power_mw; }
};

/// Poisson pair emission, independent per-photon detection, Gaussian timing
/// jitter, non-paralyzable dead time and Poisson dark counts. Deterministic in
/// `config.rng_seed`; every channel of the result is sorted.
TagStream simulate(const SimConfig& config);

/// Fraction of true pairs whose detector timing difference falls inside a
/// window of `width_ps` (two independent jitters of jitter_sigma_ps each).
double pair_capture_fraction(const SimConfig& config, std::uint64_t width_ps);

/// Analytic heralded g2(0) of the simulator in heralded_g2 mode: accidental
/// triples from independent pairs and dark counts over a window of `width_ps`.
/// Dead time is not modelled.
double g2_model(const SimConfig& config, std::uint64_t width_ps = 1000);

/// Expected (U1,D2) coincidence rate in Hz without dead-time losses, true plus
/// accidental, for a window of `width_ps`.
double expected_coincidence_rate_hz(const SimConfig& config, std::uint64_t width_ps = 1000);

struct SinglesPoint {
  double power_mw;
  double singles_rate_hz;  // mean observed rate over the four channels
};

/// Simulates every power with the rest of `config` unchanged.
std::vector<SinglesPoint> singles_saturation_curve(const SimConfig& config, std::span<const double> powers_mw);

struct HomScanConfig {
  std::vector<double> delays_ps;
  double dip_width_sigma_ps = 150.0;
  double base_visibility = 0.94;   // intercept of the visibility/g2 line
  double visibility_slope = 1.55;  // V = base - slope * g2
  double dwell_s = 1.0;            // integration time per delay setting
  std::uint64_t window_ps = 1000;
};

using ScanPoint = DipPoint;

/// V_eff = clamp(base_visibility - visibility_slope * g2_model, 0, 1).
double hom_effective_visibility(const SimConfig& config, const HomScanConfig& scan);

/// Phenomenological Hong-Ou-Mandel dip: Poisson counts around
/// C0 * (1 - V_eff * exp(-delay^2 / (2 sigma^2))), C0 the expected coincidence
/// count per dwell.
std::vector<ScanPoint> hom_scan(const SimConfig& config, const HomScanConfig& scan);

}  // namespace qrng
