#include "qrng/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "qrng/error.hpp"

namespace qrng {

namespace {

using json = nlohmann::json;

// Reads keys of one JSON object and rejects any key that was never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError("config: '" + path_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError("config: bad value for '" + where(key) + "': " + e.what());
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const char* key) const { return j_.at(key); }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ValidationError("config: unknown key '" + where(key) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

SimMode mode_from_string(const std::string& s) {
  if (s == "bits") return SimMode::bits;
  if (s == "heralded_g2") return SimMode::heralded_g2;
  throw ValidationError("config: sim.mode must be 'bits' or 'heralded_g2'");
}

const char* to_string(SimMode m) { return m == SimMode::bits ? "bits" : "heralded_g2"; }

EntropyEstimate estimate_from_string(const std::string& s) {
  if (s == "plug_in") return EntropyEstimate::plug_in;
  if (s == "conservative") return EntropyEstimate::conservative;
  throw ValidationError("config: entropy_estimate must be 'plug_in' or 'conservative'");
}

const char* to_string(EntropyEstimate e) { return e == EntropyEstimate::plug_in ? "plug_in" : "conservative"; }

SimConfig read_sim(const json& j, const std::string& path) {
  SimConfig s;
  ObjectReader r(j, path);
  r.get("pump_power_mw", s.pump_power_mw);
  r.get("pair_rate_hz_per_mw", s.pair_rate_hz_per_mw);
  r.get("pair_bias", s.pair_bias);
  if (r.has("detection_efficiency")) {
    const json& e = r.at("detection_efficiency");
    if (e.is_number()) {
      s.detection_efficiency.fill(e.get<double>());
    } else if (e.is_array() && e.size() == kChannelCount) {
      for (std::size_t i = 0; i < kChannelCount; ++i) s.detection_efficiency[i] = e[i].get<double>();
    } else {
      throw ValidationError("config: '" + r.where("detection_efficiency") +
                            "' must be a number or an array of 4 numbers (U1, U2, D1, D2)");
    }
  }
  r.get("jitter_sigma_ps", s.jitter_sigma_ps);
  r.get("dead_time_ps", s.dead_time_ps);
  r.get("dark_rate_hz", s.dark_rate_hz);
  r.get("duration_s", s.duration_s);
  r.get("rng_seed", s.rng_seed);
  std::string mode = to_string(s.mode);
  r.get("mode", mode);
  s.mode = mode_from_string(mode);
  r.finish();
  return s;
}

HomScanConfig read_hom(const json& j, const std::string& path) {
  HomScanConfig h{default_hom_delays()};
  ObjectReader r(j, path);
  r.get("delays_ps", h.delays_ps);
  r.get("dip_width_sigma_ps", h.dip_width_sigma_ps);
  r.get("base_visibility", h.base_visibility);
  r.get("visibility_slope", h.visibility_slope);
  r.get("dwell_s", h.dwell_s);
  r.get("window_ps", h.window_ps);
  r.finish();
  return h;
}

json hom_to_json(const HomScanConfig& h) {
  return {{"delays_ps", h.delays_ps},       {"dip_width_sigma_ps", h.dip_width_sigma_ps},
          {"base_visibility", h.base_visibility}, {"visibility_slope", h.visibility_slope},
          {"dwell_s", h.dwell_s},           {"window_ps", h.window_ps}};
}

}  // namespace

std::vector<double> default_hom_delays() {
  std::vector<double> d;
  for (int k = -40; k <= 40; ++k) d.push_back(25.0 * k);
  return d;
}

json to_json(const SimConfig& s) {
  return {{"pump_power_mw", s.pump_power_mw},
          {"pair_rate_hz_per_mw", s.pair_rate_hz_per_mw},
          {"pair_bias", s.pair_bias},
          {"detection_efficiency", s.detection_efficiency},
          {"jitter_sigma_ps", s.jitter_sigma_ps},
          {"dead_time_ps", s.dead_time_ps},
          {"dark_rate_hz", s.dark_rate_hz},
          {"duration_s", s.duration_s},
          {"rng_seed", s.rng_seed},
          {"mode", to_string(s.mode)}};
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig s = read_sim(j, "sim");
  s.validate();
  return s;
}

void PipelineConfig::validate() const {
  sim.validate();
  window.validate();
  extractor.validate();
  if (!(safety_margin >= 0.0 && safety_margin < 1.0)) throw ValidationError("config: safety_margin must lie in [0,1)");
  if (!(stats.alpha > 0.0 && stats.alpha < 1.0)) throw ValidationError("config: stats.alpha must lie in (0,1)");
  if (stats.sequence_bits == 0 || stats.sequence_count == 0)
    throw ValidationError("config: stats.sequence_bits and stats.sequence_count must be > 0");
  if (stats.max_lag == 0) throw ValidationError("config: stats.max_lag must be > 0");
  if (characterization.g2_duration_s < 0.0) throw ValidationError("config: characterization.g2_duration_s must be >= 0");
  for (double p : characterization.powers_mw)
    if (!(p > 0.0)) throw ValidationError("config: characterization.powers_mw entries must be > 0");
  for (double p : sweep.powers_mw)
    if (!(p > 0.0)) throw ValidationError("config: sweep.powers_mw entries must be > 0");
  if (!sweep.powers_mw.empty()) {
    if (!(sweep.reference_power_mw > 0.0) || !(sweep.segment_duration_s > 0.0) || sweep.segments == 0)
      throw ValidationError("config: sweep needs reference_power_mw > 0, segment_duration_s > 0, segments > 0");
  }
  if (output_dir.empty()) throw ValidationError("config: output_dir must not be empty");
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  ObjectReader r(j, "");
  if (r.has("sim")) c.sim = read_sim(r.at("sim"), "sim");
  if (r.has("window")) {
    ObjectReader w(r.at("window"), "window");
    w.get("width_ps", c.window.width_ps);
    w.get("bin_ps", c.window.bin_ps);
    w.finish();
  }
  if (r.has("extractor")) {
    ObjectReader e(r.at("extractor"), "extractor");
    e.get("block_bits", c.extractor.block_bits);
    e.get("ratio", c.extractor.ratio);
    e.get("seed_key", c.extractor.seed_key);
    e.get("safety_margin", c.safety_margin);
    std::string est = to_string(c.entropy_estimate);
    e.get("entropy_estimate", est);
    c.entropy_estimate = estimate_from_string(est);
    e.finish();
  }
  if (r.has("stats")) {
    ObjectReader s(r.at("stats"), "stats");
    s.get("alpha", c.stats.alpha);
    s.get("sequence_bits", c.stats.sequence_bits);
    s.get("sequence_count", c.stats.sequence_count);
    s.get("max_lag", c.stats.max_lag);
    s.finish();
  }
  if (r.has("characterization")) {
    ObjectReader ch(r.at("characterization"), "characterization");
    ch.get("enabled", c.characterization.enabled);
    ch.get("g2_duration_s", c.characterization.g2_duration_s);
    ch.get("g2_widths_ps", c.characterization.g2_widths_ps);
    ch.get("powers_mw", c.characterization.powers_mw);
    if (ch.has("hom")) c.characterization.hom = read_hom(ch.at("hom"), "characterization.hom");
    ch.finish();
  }
  if (r.has("sweep")) {
    ObjectReader s(r.at("sweep"), "sweep");
    s.get("powers_mw", c.sweep.powers_mw);
    s.get("reference_power_mw", c.sweep.reference_power_mw);
    s.get("segment_duration_s", c.sweep.segment_duration_s);
    s.get("segments", c.sweep.segments);
    s.finish();
  }
  std::string out = c.output_dir.string();
  r.get("output_dir", out);
  c.output_dir = out;
  r.finish();
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config '" + path.string() + "' is not valid JSON: " + e.what(), e.byte);
  }
  return pipeline_config_from_json(j);
}

json to_json(const PipelineConfig& c) {
  return {{"sim", to_json(c.sim)},
          {"window", {{"width_ps", c.window.width_ps}, {"bin_ps", c.window.bin_ps}}},
          {"extractor",
           {{"block_bits", c.extractor.block_bits},
            {"ratio", c.extractor.ratio},
            {"seed_key", c.extractor.seed_key},
            {"safety_margin", c.safety_margin},
            {"entropy_estimate", to_string(c.entropy_estimate)}}},
          {"stats",
           {{"alpha", c.stats.alpha},
            {"sequence_bits", c.stats.sequence_bits},
            {"sequence_count", c.stats.sequence_count},
            {"max_lag", c.stats.max_lag}}},
          {"characterization",
           {{"enabled", c.characterization.enabled},
            {"g2_duration_s", c.characterization.g2_duration_s},
            {"g2_widths_ps", c.characterization.g2_widths_ps},
            {"powers_mw", c.characterization.powers_mw},
            {"hom", hom_to_json(c.characterization.hom)}}},
          {"sweep",
           {{"powers_mw", c.sweep.powers_mw},
            {"reference_power_mw", c.sweep.reference_power_mw},
            {"segment_duration_s", c.sweep.segment_duration_s},
            {"segments", c.sweep.segments}}},
          {"output_dir", c.output_dir.string()}};
}

}  // namespace qrng
