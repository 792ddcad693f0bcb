#include "qrng/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>

#include "parallel.hpp"
#include "qrng/bitgen.hpp"
#include "qrng/entropy.hpp"
#include "qrng/hash.hpp"
#include "qrng/nist.hpp"
#include "qrng/report_io.hpp"
#include "qrng/rng.hpp"
#include "qrng/spdcsim.hpp"
#include "qrng/stats.hpp"
#include "qrng/toeplitz.hpp"

namespace qrng {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kCompanionStream = 0x6732;
constexpr std::uint64_t kSweepStream = 1000;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Stage {
 public:
  Stage(std::string name, fs::path dir) : name_(std::move(name)), dir_(std::move(dir)) {}

  fs::path artifact(const std::string& file) {
    files_.push_back(file);
    return dir_ / (file + ".partial");
  }

  json& metrics() { return metrics_; }
  const std::string& name() const { return name_; }

  json commit() {
    json outputs = json::array();
    for (const auto& file : files_) {
      const fs::path final_path = dir_ / file;
      fs::rename(dir_ / (file + ".partial"), final_path);
      outputs.push_back({{"path", file}, {"sha256", sha256_file(final_path)}, {"bytes", fs::file_size(final_path)}});
    }
    return {{"name", name_}, {"outputs", outputs}, {"metrics", metrics_}};
  }

 private:
  std::string name_;
  fs::path dir_;
  std::vector<std::string> files_;
  json metrics_ = json::object();
};

BitBuffer simulate_raw_bits(const SimConfig& sim, const CoincidenceWindow& w) {
  const TagStream tags = simulate(sim);
  const auto events = find_coincidences(tags, w);
  return generate_raw_bits(events, tags.duration_s()).bits;
}

}  // namespace

std::string config_hash(const PipelineConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  return sha256_hex(j.dump());
}

HeraldedG2 companion_g2(const SimConfig& sim, double duration_s, const CoincidenceWindow& w) {
  SimConfig g = sim;
  g.mode = SimMode::heralded_g2;
  g.rng_seed = derive_seed(sim.rng_seed, kCompanionStream);
  if (duration_s > 0.0) g.duration_s = duration_s;
  return heralded_g2(simulate(g), w);
}

CharacterizationResult characterize(const PipelineConfig& config, unsigned threads) {
  const auto& ch = config.characterization;
  CharacterizationResult res;
  res.points.resize(ch.powers_mw.size());
  detail::parallel_for(ch.powers_mw.size(), threads, [&](std::size_t i) {
    SimConfig sim = config.sim;
    sim.pump_power_mw = ch.powers_mw[i];
    CharacterizationPoint& p = res.points[i];
    p.power_mw = sim.pump_power_mw;
    p.g2 = companion_g2(sim, ch.g2_duration_s, config.window).g2;
    p.g2_model = g2_model(sim, config.window.width_ps);
    const auto scan = hom_scan(sim, ch.hom);
    p.visibility = dip_visibility(scan);
  });
  if (res.points.size() >= 2) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : res.points) {
      x.push_back(p.g2);
      y.push_back(p.visibility);
    }
    res.visibility_vs_g2 = fit_linear(x, y);
  }
  return res;
}

SweepResult power_sweep(const PipelineConfig& config, unsigned threads) {
  const auto& sw = config.sweep;
  SweepResult res;
  res.points.resize(sw.powers_mw.size());
  detail::parallel_for(sw.powers_mw.size(), threads, [&](std::size_t i) {
    SweepPoint& p = res.points[i];
    p.power_mw = sw.powers_mw[i];
    BitBuffer raw;
    for (std::size_t k = 0; k < sw.segments; ++k) {
      SimConfig sim = config.sim;
      sim.mode = SimMode::bits;
      sim.pump_power_mw = p.power_mw;
      sim.duration_s = sw.segment_duration_s * sw.reference_power_mw / p.power_mw;
      sim.rng_seed = derive_seed(config.sim.rng_seed, kSweepStream + k);
      raw.append(simulate_raw_bits(sim, config.window));
      p.duration_s += sim.duration_s;
    }
    p.raw_bits = raw.size();
    p.raw_rate_hz = static_cast<double>(raw.size()) / p.duration_s;
    const EntropyReport rep = min_entropy_8bit(raw, config.entropy_estimate);
    p.h_inf_per_bit = rep.h_inf_per_bit;
    p.ratio = extraction_ratio(rep, {config.safety_margin, config.extractor.ratio});
    ExtractorConfig ex = config.extractor;
    ex.ratio = p.ratio;
    if (raw.size() >= ex.block_bits) p.extracted_bits = extract(raw, ex).size();
    p.extracted_rate_hz = static_cast<double>(p.extracted_bits) / p.duration_s;
  });

  std::vector<std::size_t> order(res.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return res.points[a].power_mw < res.points[b].power_mw; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (res.points[order[i]].h_inf_per_bit > res.points[order[i - 1]].h_inf_per_bit) res.entropy_non_increasing = false;

  if (res.points.size() >= 2) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : res.points) {
      x.push_back(p.power_mw);
      y.push_back(p.extracted_rate_hz * 1e-6);
    }
    res.rate_fit = fit_linear(x, y);
  }
  return res;
}

json run_pipeline(const PipelineConfig& config, unsigned threads) {
  config.validate();
  const fs::path dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  json manifest = {{"config", to_json(config)},
                   {"config_sha256", config_hash(config)},
                   {"seed", config.sim.rng_seed},
                   {"stages", json::array()}};
  json timings = json::object();

  auto run = [&](const std::string& name, const std::function<void(Stage&)>& body) {
    Stage stage(name, dir);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(stage);
      manifest["stages"].push_back(stage.commit());
    } catch (const std::exception& e) {
      throw StageError(name, e.what(), std::current_exception());
    }
    timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  TagStream tags;
  std::vector<CoincidenceEvent> events;
  RawBitRecord raw;
  EntropyReport entropy;
  BitBuffer extracted;

  run("simulate", [&](Stage& s) {
    tags = simulate(config.sim);
    write_tags(tags, s.artifact("tags.qtt"));
    json counts = json::object();
    for (ChannelId c : kAllChannels) {
      const auto n = tags.channel(c).size();
      counts[std::string(to_string(c))] = {{"tags", n}, {"rate_hz", static_cast<double>(n) / tags.duration_s()}};
    }
    s.metrics() = {{"duration_s", tags.duration_s()}, {"channels", counts}, {"total_tags", tags.total_tags()}};
  });

  run("coincide", [&](Stage& s) {
    events = find_coincidences(tags, config.window);
    write_events_csv(events, tags.duration_ps(), s.artifact("events.csv"));
    const auto hist =
        correlation_histogram(tags.channel(ChannelId::U1), tags.channel(ChannelId::D2), config.window, tags.duration_ps());
    write_histogram_csv(hist, s.artifact("histogram.csv"));

    json m = {{"events", events.size()}, {"window_ps", config.window.width_ps}, {"bin_ps", config.window.bin_ps},
              {"coincidence_rate_hz", static_cast<double>(events.size()) / tags.duration_s()},
              {"histogram_accidentals_per_bin", hist.accidentals_per_bin}};
    try {
      m["heralding_efficiency"] = to_json(heralding_efficiency(tags, config.window));
    } catch (const InsufficientStatistics& e) {
      m["heralding_efficiency"] = {{"error", e.what()}};
    }
    if (config.characterization.enabled) {
      SimConfig g = config.sim;
      g.mode = SimMode::heralded_g2;
      g.rng_seed = derive_seed(config.sim.rng_seed, kCompanionStream);
      if (config.characterization.g2_duration_s > 0.0) g.duration_s = config.characterization.g2_duration_s;
      const TagStream companion = simulate(g);
      json g2 = {{"duration_s", g.duration_s}, {"model", g2_model(g, config.window.width_ps)}};
      try {
        g2["measured"] = to_json(heralded_g2(companion, config.window));
        g2["vs_window"] = to_json(g2_vs_window(companion, config.characterization.g2_widths_ps));
      } catch (const InsufficientStatistics& e) {
        g2["error"] = e.what();
      }
      m["heralded_g2"] = std::move(g2);
    }
    s.metrics() = std::move(m);
    write_text(s.artifact("coincidence.json"), s.metrics().dump(2) + "\n");
  });

  run("bits", [&](Stage& s) {
    raw = generate_raw_bits(events, tags.duration_s(), "simulate");
    write_bits(raw.bits, s.artifact("raw.qbb"), BitFormat::packed);
    s.metrics() = to_json(raw);
    write_text(s.artifact("raw.json"), s.metrics().dump(2) + "\n");
  });

  double ratio = 0.0;
  run("entropy", [&](Stage& s) {
    entropy = min_entropy_8bit(raw.bits, config.entropy_estimate);
    ratio = extraction_ratio(entropy, {config.safety_margin, config.extractor.ratio});
    const json j = to_json(entropy, ratio);
    write_text(s.artifact("entropy.json"), j.dump(2) + "\n");
    s.metrics() = {{"h_inf_per_bit", entropy.h_inf_per_bit}, {"p_max", entropy.p_max},
                   {"n_blocks", entropy.n_blocks}, {"extraction_ratio", ratio}};
  });

  run("extract", [&](Stage& s) {
    ExtractorConfig ex = config.extractor;
    ex.ratio = ratio;
    extracted = extract(raw.bits, ex, threads);
    write_bits(extracted, s.artifact("extracted.qbb"), BitFormat::packed);
    s.metrics() = {{"block_bits", ex.block_bits},
                   {"output_bits_per_block", ex.output_bits()},
                   {"blocks", raw.bits.size() / ex.block_bits},
                   {"extracted_bits", extracted.size()},
                   {"seed_key", ex.seed_key},
                   {"extracted_rate_hz", static_cast<double>(extracted.size()) / raw.duration_s}};
  });

  run("test", [&](Stage& s) {
    const std::size_t len = config.stats.sequence_bits;
    const std::size_t count = std::min(config.stats.sequence_count, extracted.size() / len);
    json j;
    if (count == 0) {
      j = {{"skipped", "extracted output shorter than one sequence of " + std::to_string(len) + " bits"}};
      s.metrics() = j;
    } else {
      std::vector<BitBuffer> seqs;
      for (std::size_t i = 0; i < count; ++i) seqs.push_back(extracted.slice(i * len, len));
      const TestReport rep = nist_subset(seqs, config.stats.alpha, threads);
      j = to_json(rep);
      j["sequence_bits"] = len;
      write_text(s.artifact("nist.txt"), format_table(rep));
      s.metrics() = {{"sequences", count}, {"sequence_bits", len}, {"all_passed", rep.all_passed()}};
    }
    write_text(s.artifact("nist.json"), j.dump(2) + "\n");
  });

  run("autocorr", [&](Stage& s) {
    if (extracted.size() <= config.stats.max_lag) {
      const json j = {{"skipped", "extracted output not longer than max_lag"}};
      write_text(s.artifact("autocorr.json"), j.dump(2) + "\n");
      s.metrics() = j;
      return;
    }
    const AutocorrReport rep = autocorrelation(extracted, config.stats.max_lag);
    const double bound = 5.0 / std::sqrt(static_cast<double>(extracted.size()));
    double worst = 0.0;
    for (double r : rep.r) worst = std::max(worst, std::fabs(r));
    json j = to_json(rep);
    j["bits"] = extracted.size();
    j["bound"] = bound;
    j["max_abs_r"] = worst;
    write_text(s.artifact("autocorr.json"), j.dump(2) + "\n");
    std::string csv = "lag,r\n";
    for (std::size_t i = 0; i < rep.lags.size(); ++i) csv += std::to_string(rep.lags[i]) + "," + fmt(rep.r[i]) + "\n";
    write_text(s.artifact("fig5.csv"), csv);
    s.metrics() = {{"max_abs_r", worst}, {"bound", bound}, {"within_bound", worst < bound}};
  });

  if (config.characterization.enabled && !config.characterization.powers_mw.empty()) {
    run("characterize", [&](Stage& s) {
      const auto res = characterize(config, threads);
      std::string a = "power_mw,visibility,g2\n";
      std::string b = "g2,visibility,fit\n";
      json pts = json::array();
      for (const auto& p : res.points) {
        a += fmt(p.power_mw) + "," + fmt(p.visibility) + "," + fmt(p.g2) + "\n";
        const double fit = res.visibility_vs_g2 ? res.visibility_vs_g2->intercept + res.visibility_vs_g2->slope * p.g2
                                                : p.visibility;
        b += fmt(p.g2) + "," + fmt(p.visibility) + "," + fmt(fit) + "\n";
        pts.push_back({{"power_mw", p.power_mw}, {"g2", p.g2}, {"g2_model", p.g2_model}, {"visibility", p.visibility}});
      }
      write_text(s.artifact("fig2a.csv"), a);
      write_text(s.artifact("fig2b.csv"), b);
      json m = {{"points", pts}};
      m["visibility_vs_g2"] = res.visibility_vs_g2 ? to_json(*res.visibility_vs_g2) : json(nullptr);
      s.metrics() = m;
    });
  }

  if (!config.sweep.powers_mw.empty()) {
    run("sweep", [&](Stage& s) {
      const auto res = power_sweep(config, threads);
      std::string csv = "power_mw,h_inf_per_bit,bitrate_hz\n";
      json pts = json::array();
      for (const auto& p : res.points) {
        csv += fmt(p.power_mw) + "," + fmt(p.h_inf_per_bit) + "," + fmt(p.extracted_rate_hz) + "\n";
        pts.push_back({{"power_mw", p.power_mw},
                       {"duration_s", p.duration_s},
                       {"raw_bits", p.raw_bits},
                       {"h_inf_per_bit", p.h_inf_per_bit},
                       {"ratio", p.ratio},
                       {"extracted_bits", p.extracted_bits},
                       {"raw_rate_hz", p.raw_rate_hz},
                       {"extracted_rate_hz", p.extracted_rate_hz}});
      }
      write_text(s.artifact("fig3.csv"), csv);
      json m = {{"points", pts}, {"entropy_non_increasing", res.entropy_non_increasing}};
      m["rate_fit_mbps_per_mw"] = res.rate_fit ? to_json(*res.rate_fit) : json(nullptr);
      s.metrics() = m;
    });
  }

  manifest["summary"] = {{"raw_bits", raw.bits.size()},
                         {"raw_bit_rate_hz", raw.bit_rate_hz()},
                         {"extracted_bits", extracted.size()},
                         {"extracted_bit_rate_hz", static_cast<double>(extracted.size()) / raw.duration_s},
                         {"h_inf_per_bit", entropy.h_inf_per_bit}};
  manifest["timings_s"] = timings;
  manifest["threads"] = threads;

  const fs::path partial = dir / "manifest.json.partial";
  write_text(partial, manifest.dump(2) + "\n");
  fs::rename(partial, dir / "manifest.json");
  return manifest;
}

}  // namespace qrng
