// Prints raw bit rate, min-entropy, heralded g2 and singles per pump power for
// a config, to tune the sim section against the target numbers.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrng/bitgen.hpp"
#include "qrng/coincidence.hpp"
#include "qrng/config.hpp"
#include "qrng/entropy.hpp"
#include "qrng/pipeline.hpp"
#include "qrng/spdcsim.hpp"

using namespace qrng;

int main(int argc, char** argv) {
  CLI::App app{"Simulator calibration table"};
  std::string config_path;
  std::vector<double> powers = {1, 3, 5, 9, 11, 17};
  app.add_option("-c,--config", config_path, "Pipeline config file");
  app.add_option("--powers", powers, "Pump powers in mW")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
  std::printf("%8s %10s %10s %10s %8s %8s %8s %10s %8s\n", "mW", "singles", "bits", "rate_hz", "bias", "h_inf",
              "g2", "g2_model", "secs");
  for (double p : powers) {
    const auto t0 = std::chrono::steady_clock::now();
    SimConfig sim = cfg.sim;
    sim.pump_power_mw = p;
    const TagStream tags = simulate(sim);
    const auto events = find_coincidences(tags, cfg.window);
    const RawBitRecord rec = generate_raw_bits(events, tags.duration_s());
    const auto ent = min_entropy_8bit(rec.bits, cfg.entropy_estimate);
    double g2 = -1.0;
    try {
      g2 = companion_g2(sim, cfg.characterization.g2_duration_s, cfg.window).g2;
    } catch (const InsufficientStatistics&) {
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%8.2f %10.4g %10zu %10.4g %8.4f %8.4f %8.4f %10.4f %8.2f\n", p,
                static_cast<double>(tags.total_tags()) / 4.0 / tags.duration_s(), rec.bits.size(), rec.bit_rate_hz(),
                rec.bits.empty() ? 0.0 : bias(rec), ent.h_inf_per_bit, g2, g2_model(sim, cfg.window.width_ps), secs);
  }
  return 0;
}
