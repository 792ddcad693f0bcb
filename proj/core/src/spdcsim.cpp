#include "qrng/spdcsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qrng/error.hpp"
#include "qrng/rng.hpp"

namespace qrng {

namespace {

// Poisson-process clock kept as integer picoseconds plus a fractional part so
// long acquisitions do not lose sub-picosecond resolution in a double.
struct ProcessClock {
  std::uint64_t whole = 0;
  double frac = 0.0;

  bool advance(double gap_ps, std::uint64_t limit_ps) {
    frac += gap_ps;
    if (!(frac < static_cast<double>(limit_ps - whole) + 1.0)) return false;
    const double w = std::floor(frac);
    whole += static_cast<std::uint64_t>(w);
    frac -= w;
    return whole <= limit_ps;
  }
};

class ChannelBuilder {
 public:
  explicit ChannelBuilder(std::uint64_t duration_ps) : duration_ps_(duration_ps) {}

  void add(const ProcessClock& clock, double jitter_ps) {
    const double offset = std::nearbyint(clock.frac + jitter_ps);
    if (offset < 0.0) {
      const auto back = static_cast<std::uint64_t>(-offset);
      if (back > clock.whole) return;
      push(clock.whole - back);
    } else {
      push(clock.whole + static_cast<std::uint64_t>(offset));
    }
  }

  // Dark counts arrive in order and need no sorting.
  void add_exact(std::uint64_t t) {
    if (t <= duration_ps_) exact_.push_back(t);
  }

  std::vector<std::uint64_t>& jittered() { return jittered_; }
  std::vector<std::uint64_t>& exact() { return exact_; }

 private:
  void push(std::uint64_t t) {
    if (t <= duration_ps_) jittered_.push_back(t);
  }

  std::uint64_t duration_ps_;
  std::vector<std::uint64_t> jittered_;
  std::vector<std::uint64_t> exact_;
};

// Jittered emission sequences are almost sorted; insertion sort is linear in
// that case. Falls back to std::sort when displacement is large.
void sort_nearly_sorted(std::vector<std::uint64_t>& v) {
  const std::size_t budget = 16 * v.size() + 64;
  std::size_t moves = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const std::uint64_t x = v[i];
    std::size_t j = i;
    while (j > 0 && v[j - 1] > x) {
      v[j] = v[j - 1];
      --j;
      if (++moves > budget) {
        v[j] = x;
        std::sort(v.begin(), v.end());
        return;
      }
    }
    v[j] = x;
  }
}

std::vector<std::uint64_t> apply_dead_time(std::vector<std::uint64_t> sorted, std::uint64_t dead_ps) {
  if (dead_ps == 0 || sorted.empty()) return sorted;
  std::size_t keep = 1;
  std::uint64_t last = sorted[0];
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] - last >= dead_ps) {
      last = sorted[i];
      sorted[keep++] = last;
    }
  }
  sorted.resize(keep);
  return sorted;
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string("SimConfig: ") + name + " must lie in [0,1]");
}

void check_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string("SimConfig: ") + name + " must be >= 0");
}

}  // namespace

void SimConfig::validate() const {
  check_nonnegative(pump_power_mw, "pump_power_mw");
  check_nonnegative(pair_rate_hz_per_mw, "pair_rate_hz_per_mw");
  check_nonnegative(jitter_sigma_ps, "jitter_sigma_ps");
  check_nonnegative(dead_time_ps, "dead_time_ps");
  check_nonnegative(dark_rate_hz, "dark_rate_hz");
  check_probability(pair_bias, "pair_bias");
  for (double eta : detection_efficiency) check_probability(eta, "detection_efficiency");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ValidationError("SimConfig: duration_s must be > 0");
  if (duration_s * static_cast<double>(kPicosPerSecond) > 1.0e19)
    throw ValidationError("SimConfig: duration_s exceeds the 64-bit picosecond range");
}

TagStream simulate(const SimConfig& config) {
  config.validate();
  const auto duration_ps = static_cast<std::uint64_t>(std::llround(config.duration_s * static_cast<double>(kPicosPerSecond)));
  std::array<ChannelBuilder, kChannelCount> builders = {ChannelBuilder(duration_ps), ChannelBuilder(duration_ps),
                                                         ChannelBuilder(duration_ps), ChannelBuilder(duration_ps)};
  const double sigma = config.jitter_sigma_ps;
  const auto& eta = config.detection_efficiency;

  struct Arm {
    ChannelId a;
    ChannelId b;
    double fraction;
  };
  std::vector<Arm> arms;
  if (config.mode == SimMode::bits) {
    arms.push_back({ChannelId::U1, ChannelId::D2, config.pair_bias});
    arms.push_back({ChannelId::U2, ChannelId::D1, 1.0 - config.pair_bias});
  } else {
    arms.push_back({ChannelId::U1, ChannelId::D2, config.pair_bias});
  }

  // Each arm and each dark-count channel draws from its own sub-seed, so a
  // change of pump power replays the same emission sequence in scaled time.
  for (std::size_t k = 0; k < arms.size(); ++k) {
    const Arm& arm = arms[k];
    Rng rng(derive_seed(config.rng_seed, k));
    auto jitter = [&] { return sigma > 0.0 ? sigma * rng.normal() : 0.0; };
    const double eta_a = eta[index_of(arm.a)];
    const double eta_b = eta[index_of(arm.b)];
    const double p_any = 1.0 - (1.0 - eta_a) * (1.0 - eta_b);
    const double rate_per_ps = config.pair_rate_hz() * arm.fraction * p_any / static_cast<double>(kPicosPerSecond);
    if (!(rate_per_ps > 0.0)) continue;
    const double p_both = eta_a * eta_b;
    const double p_a_only = eta_a * (1.0 - eta_b);
    ProcessClock clock;
    while (clock.advance(rng.exponential(rate_per_ps), duration_ps)) {
      // Condition on at least one photon being detected (thinned process).
      const double u = rng.uniform() * p_any;
      const bool det_a = u < p_both + p_a_only;
      const bool det_b = u < p_both || u >= p_both + p_a_only;
      if (det_a) {
        ChannelId target = arm.a;
        if (config.mode == SimMode::heralded_g2 && rng.uniform() >= 0.5) target = ChannelId::U2;
        builders[index_of(target)].add(clock, jitter());
      }
      if (det_b) builders[index_of(arm.b)].add(clock, jitter());
    }
  }

  if (config.dark_rate_hz > 0.0) {
    const double dark_per_ps = config.dark_rate_hz / static_cast<double>(kPicosPerSecond);
    for (ChannelId c : kAllChannels) {
      if (config.mode == SimMode::heralded_g2 && c == ChannelId::D1) continue;
      Rng rng(derive_seed(config.rng_seed, 16 + index_of(c)));
      ProcessClock clock;
      while (clock.advance(rng.exponential(dark_per_ps), duration_ps)) builders[index_of(c)].add_exact(clock.whole);
    }
  }

  const auto dead_ps = static_cast<std::uint64_t>(std::llround(config.dead_time_ps));
  TagStream::ChannelTimes channels;
  for (ChannelId c : kAllChannels) {
    auto& b = builders[index_of(c)];
    sort_nearly_sorted(b.jittered());
    std::vector<std::uint64_t> all(b.jittered().size() + b.exact().size());
    std::merge(b.jittered().begin(), b.jittered().end(), b.exact().begin(), b.exact().end(), all.begin());
    b.jittered() = {};
    b.exact() = {};
    channels[index_of(c)] = apply_dead_time(std::move(all), dead_ps);
  }
  return TagStream(std::move(channels), duration_ps, StreamOrigin::simulated);
}

double pair_capture_fraction(const SimConfig& config, std::uint64_t width_ps) {
  const double sigma_pair = std::sqrt(2.0) * config.jitter_sigma_ps;
  if (sigma_pair <= 0.0) return 1.0;
  const double half = 0.5 * static_cast<double>(width_ps);
  return std::erf(half / (std::sqrt(2.0) * sigma_pair));
}

double g2_model(const SimConfig& config, std::uint64_t width_ps) {
  config.validate();
  const double w = static_cast<double>(width_ps) / static_cast<double>(kPicosPerSecond);
  const double pairs = config.pair_rate_hz() * config.pair_bias;
  const double eta_s = config.detection_efficiency[index_of(ChannelId::U1)];
  const double eta_h = config.detection_efficiency[index_of(ChannelId::D2)];
  const double herald_rate = pairs * eta_h + config.dark_rate_hz;
  if (herald_rate <= 0.0) return 0.0;
  const double p_true = pairs * eta_h / herald_rate;
  // Per herald: a = partner seen in one split output, b = accidental in one output.
  const double a = p_true * eta_s * pair_capture_fraction(config, width_ps) / 2.0;
  const double b = (pairs * eta_s / 2.0 + config.dark_rate_hz) * w;
  if (a + b <= 0.0) return 0.0;
  return (2.0 * a * b + b * b) / ((a + b) * (a + b));
}

double expected_coincidence_rate_hz(const SimConfig& config, std::uint64_t width_ps) {
  const double w = static_cast<double>(width_ps) / static_cast<double>(kPicosPerSecond);
  const double pairs = config.pair_rate_hz() * config.pair_bias;
  const double eta_a = config.detection_efficiency[index_of(ChannelId::U1)];
  const double eta_b = config.detection_efficiency[index_of(ChannelId::D2)];
  const double singles_a = pairs * eta_a + config.dark_rate_hz;
  const double singles_b = pairs * eta_b + config.dark_rate_hz;
  return pairs * eta_a * eta_b * pair_capture_fraction(config, width_ps) + singles_a * singles_b * w;
}

std::vector<SinglesPoint> singles_saturation_curve(const SimConfig& config, std::span<const double> powers_mw) {
  if (powers_mw.empty()) throw ValidationError("singles_saturation_curve: powers must be non-empty");
  std::vector<SinglesPoint> out;
  out.reserve(powers_mw.size());
  for (double p : powers_mw) {
    SimConfig c = config;
    c.pump_power_mw = p;
    const TagStream s = simulate(c);
    const double per_channel = static_cast<double>(s.total_tags()) / static_cast<double>(kChannelCount);
    out.push_back({p, per_channel / s.duration_s()});
  }
  return out;
}

double hom_effective_visibility(const SimConfig& config, const HomScanConfig& scan) {
  if (!(scan.base_visibility >= 0.0 && scan.base_visibility <= 1.0))
    throw ValidationError("HomScanConfig: base_visibility must lie in [0,1]");
  const double v = scan.base_visibility - scan.visibility_slope * g2_model(config, scan.window_ps);
  return std::clamp(v, 0.0, 1.0);
}

std::vector<ScanPoint> hom_scan(const SimConfig& config, const HomScanConfig& scan) {
  config.validate();
  if (!(scan.dip_width_sigma_ps > 0.0)) throw ValidationError("HomScanConfig: dip_width_sigma_ps must be > 0");
  if (!(scan.dwell_s > 0.0)) throw ValidationError("HomScanConfig: dwell_s must be > 0");
  const double v_eff = hom_effective_visibility(config, scan);
  const double c0 = expected_coincidence_rate_hz(config, scan.window_ps) * scan.dwell_s;
  Rng rng(derive_seed(config.rng_seed, 0x484F4DULL));
  std::vector<ScanPoint> out;
  out.reserve(scan.delays_ps.size());
  for (double d : scan.delays_ps) {
    const double s = scan.dip_width_sigma_ps;
    const double mean = c0 * (1.0 - v_eff * std::exp(-d * d / (2.0 * s * s)));
    out.push_back({d, static_cast<double>(rng.poisson(mean))});
  }
  return out;
}

}  // namespace qrng
