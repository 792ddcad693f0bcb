#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/coincidence.hpp"
#include "qrng/entropy.hpp"
#include "qrng/spdcsim.hpp"
#include "qrng/toeplitz.hpp"

namespace qrng {

struct StatsConfig {
  double alpha = 0.01;
  std::size_t sequence_bits = 100'000;
  std::size_t sequence_count = 10;
  std::size_t max_lag = 100;
};

/// HOM delays -1000..1000 ps in 25 ps steps.
std::vector<double> default_hom_delays();

/// Source characterisation run next to the bit pipeline: heralded g2 from a
/// companion simulation in heralded_g2 mode, and the HOM dip per power.
struct CharacterizationConfig {
  bool enabled = true;
  double g2_duration_s = 0.0;  // 0: same as sim.duration_s
  std::vector<std::uint64_t> g2_widths_ps = {500, 1000, 1500, 2000, 2500, 3000};
  std::vector<double> powers_mw;  // fig2a/fig2b points; empty skips them
  HomScanConfig hom{default_hom_delays()};
};

/// Power sweep for fig3. Every point replays the same emission sequence in
/// scaled time: segment k of every point uses seed derive_seed(rng_seed, 1000+k)
/// and lasts segment_duration_s · reference_power_mw / power.
struct SweepConfig {
  std::vector<double> powers_mw;  // empty: no sweep
  double reference_power_mw = 1.0;
  double segment_duration_s = 0.3;
  std::size_t segments = 1;
};

struct PipelineConfig {
  SimConfig sim;
  CoincidenceWindow window;
  ExtractorConfig extractor;  // extractor.ratio is the cap of the extraction policy
  double safety_margin = 0.0;
  EntropyEstimate entropy_estimate = EntropyEstimate::plug_in;
  StatsConfig stats;
  CharacterizationConfig characterization;
  SweepConfig sweep;
  std::filesystem::path output_dir = "qrng_run";

  /// Throws ValidationError naming the offending key.
  void validate() const;
};

/// Strict parser: unknown keys are rejected. Missing keys keep their defaults.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& config);

nlohmann::json to_json(const SimConfig& sim);
SimConfig sim_config_from_json(const nlohmann::json& j);

}  // namespace qrng
