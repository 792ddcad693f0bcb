#pragma once

#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/coincidence.hpp"
#include "qrng/config.hpp"
#include "qrng/error.hpp"

namespace qrng {

/// A pipeline stage failed. `cause()` holds the original exception.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, std::exception_ptr cause)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)), cause_(std::move(cause)) {}

  const std::string& stage() const noexcept { return stage_; }
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  std::exception_ptr cause_;
};

/// Heralded g2 from a companion heralded_g2-mode run of `sim` (seed derived
/// from sim.rng_seed). `duration_s` <= 0 keeps sim.duration_s.
HeraldedG2 companion_g2(const SimConfig& sim, double duration_s, const CoincidenceWindow& w);

struct CharacterizationPoint {
  double power_mw = 0.0;
  double g2 = 0.0;        // measured on a companion run
  double g2_model = 0.0;  // analytic
  double visibility = 0.0;  // dip_visibility of the simulated HOM scan
};

struct CharacterizationResult {
  std::vector<CharacterizationPoint> points;
  std::optional<LinearFit> visibility_vs_g2;
};

CharacterizationResult characterize(const PipelineConfig& config, unsigned threads = 1);

struct SweepPoint {
  double power_mw = 0.0;
  double duration_s = 0.0;  // total over segments
  std::size_t raw_bits = 0;
  double h_inf_per_bit = 0.0;
  double ratio = 0.0;
  std::size_t extracted_bits = 0;
  double raw_rate_hz = 0.0;
  double extracted_rate_hz = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<LinearFit> rate_fit;  // extracted Mbit/s against mW
  bool entropy_non_increasing = true;
};

SweepResult power_sweep(const PipelineConfig& config, unsigned threads = 1);

/// Runs simulate, coincide, bits, entropy, extract, test and autocorr, plus
/// characterize and sweep when configured. Artifacts are written with a
/// ".partial" suffix and renamed when their stage succeeds. Returns the
/// manifest, also written to <output_dir>/manifest.json. `threads` does not
/// change any artifact.
nlohmann::json run_pipeline(const PipelineConfig& config, unsigned threads = 1);

/// SHA-256 of the canonical config JSON without output_dir.
std::string config_hash(const PipelineConfig& config);

}  // namespace qrng
