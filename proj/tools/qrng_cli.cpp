#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qrng/bitgen.hpp"
#include "qrng/coincidence.hpp"
#include "qrng/config.hpp"
#include "qrng/entropy.hpp"
#include "qrng/error.hpp"
#include "qrng/hash.hpp"
#include "qrng/nist.hpp"
#include "qrng/pipeline.hpp"
#include "qrng/report_io.hpp"
#include "qrng/spdcsim.hpp"
#include "qrng/stats.hpp"
#include "qrng/timetag.hpp"
#include "qrng/toeplitz.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qrng;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Overrides shared by `simulate` and `pipeline`.
struct SimOverrides {
  std::optional<double> power_mw;
  std::optional<double> duration_s;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--power-mw", power_mw, "Pump power in mW");
    app->add_option("--duration-s", duration_s, "Simulated acquisition time in s");
    app->add_option("--seed", seed, "RNG seed");
  }

  void apply(SimConfig& s) const {
    if (power_mw) s.pump_power_mw = *power_mw;
    if (duration_s) s.duration_s = *duration_s;
    if (seed) s.rng_seed = *seed;
  }
};

struct ExtractOverrides {
  std::optional<std::size_t> block_bits;
  std::optional<double> ratio;
  std::optional<std::uint64_t> seed_key;

  void add(CLI::App* app, bool with_defaults) {
    auto* b = app->add_option("--block-bits", block_bits, "Extractor input block size n in bits");
    auto* r = app->add_option("--ratio", ratio, "Output fraction m/n");
    app->add_option("--seed-key", seed_key, "64-bit key of the Toeplitz seed expansion");
    if (with_defaults) {
      b->default_str("1000000");
      r->default_str("0.95");
    }
  }

  void apply(ExtractorConfig& e) const {
    if (block_bits) e.block_bits = *block_bits;
    if (ratio) e.ratio = *ratio;
    if (seed_key) e.seed_key = *seed_key;
  }
};

PipelineConfig base_config(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_pipeline_config(path);
}

BitBuffer load_bits(const fs::path& p) { return read_bits(p, detect_bit_format(p)); }

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

int classify(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const StageError& s) {
    return s.cause() ? classify(s.cause()) : kExitValidation;
  } catch (const IoError&) {
    return kExitIo;
  } catch (const fs::filesystem_error&) {
    return kExitIo;
  } catch (...) {
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum random bit pipeline: simulate, coincide, extract and test"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads per stage")->check(CLI::PositiveNumber)->capture_default_str();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo of the pair source, written as a QTT1 tag file");
  std::string sim_config;
  std::string sim_out = "tags.qtt";
  std::string sim_mode;
  SimOverrides sim_over;
  sim_cmd->add_option("-c,--config", sim_config, "Pipeline config file (JSON); its sim section is used");
  sim_cmd->add_option("-o,--output", sim_out, "Output QTT1 file")->capture_default_str();
  sim_cmd->add_option("--mode", sim_mode, "bits or heralded_g2")->check(CLI::IsMember({"bits", "heralded_g2"}));
  sim_over.add(sim_cmd);

  // coincide
  auto* co_cmd = app.add_subcommand("coincide", "Pair ZeroPair/OnePair events from a QTT1 file");
  std::string co_in;
  std::string co_out = "events.csv";
  std::string co_hist;
  std::uint64_t co_width = 1000;
  std::uint64_t co_bin = 5;
  bool co_g2 = false;
  co_cmd->add_option("input", co_in, "QTT1 tag file")->required();
  co_cmd->add_option("-o,--output", co_out, "Events CSV")->capture_default_str();
  co_cmd->add_option("--width-ps", co_width, "Coincidence window width in ps")->capture_default_str();
  co_cmd->add_option("--bin-ps", co_bin, "Histogram bin in ps")->capture_default_str();
  co_cmd->add_option("--histogram", co_hist, "Also write the U1-D2 correlation histogram CSV");
  co_cmd->add_flag("--g2", co_g2, "Report heralded g2 (herald D2, signal U1 and U2)");

  // bits
  auto* bits_cmd = app.add_subcommand("bits", "Raw bits from an events CSV: ZeroPair 0, OnePair 1");
  std::string bits_in;
  std::string bits_out = "raw.qbb";
  bool bits_ascii = false;
  bits_cmd->add_option("input", bits_in, "Events CSV")->required();
  bits_cmd->add_option("-o,--output", bits_out, "Output bit file")->capture_default_str();
  bits_cmd->add_flag("--ascii", bits_ascii, "Write ASCII '0'/'1' instead of QBB1");

  // entropy
  auto* ent_cmd = app.add_subcommand("entropy", "8-bit block min-entropy, JSON on standard output");
  std::string ent_in;
  bool ent_conservative = false;
  double ent_margin = 0.0;
  double ent_cap = 0.95;
  ent_cmd->add_option("input", ent_in, "Bit file (QBB1 or ASCII)")->required();
  ent_cmd->add_flag("--conservative", ent_conservative, "Use p_max + 3 sigma");
  ent_cmd->add_option("--margin", ent_margin, "Safety margin subtracted from h_inf per bit")->capture_default_str();
  ent_cmd->add_option("--cap", ent_cap, "Upper bound of the extraction ratio")->capture_default_str();

  // extract
  auto* ex_cmd = app.add_subcommand("extract", "Toeplitz extraction of a raw bit file");
  std::string ex_in;
  std::string ex_out = "out.qbb";
  ExtractOverrides ex_over;
  ex_cmd->add_option("input", ex_in, "Raw bit file")->required();
  ex_cmd->add_option("-o,--output", ex_out, "Output QBB1 file")->capture_default_str();
  ex_over.add(ex_cmd, true);

  // test
  auto* test_cmd = app.add_subcommand("test", "NIST SP 800-22 subset on consecutive sequences");
  std::string test_in;
  std::size_t test_seqs = 10;
  std::size_t test_bits = 100'000;
  double test_alpha = 0.01;
  bool test_table = false;
  test_cmd->add_option("input", test_in, "Bit file")->required();
  test_cmd->add_option("--sequences", test_seqs, "Number of sequences")->capture_default_str();
  test_cmd->add_option("--bits", test_bits, "Bits per sequence")->capture_default_str();
  test_cmd->add_option("--alpha", test_alpha, "Significance level")->capture_default_str();
  test_cmd->add_flag("--table", test_table, "Print a table instead of JSON");

  // autocorr
  auto* ac_cmd = app.add_subcommand("autocorr", "Autocorrelation r(k) for lags 1..max-lag");
  std::string ac_in;
  std::size_t ac_lag = 100;
  std::string ac_csv;
  ac_cmd->add_option("input", ac_in, "Bit file")->required();
  ac_cmd->add_option("--max-lag", ac_lag, "Largest lag")->capture_default_str();
  ac_cmd->add_option("--csv", ac_csv, "Also write lag,r rows");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run every stage and write artifacts plus manifest.json");
  std::string pipe_config;
  std::string pipe_out;
  SimOverrides pipe_sim;
  ExtractOverrides pipe_ex;
  pipe_cmd->add_option("-c,--config", pipe_config, "Pipeline config file (JSON)");
  pipe_cmd->add_option("-o,--output-dir", pipe_out, "Output directory (overrides output_dir)");
  pipe_sim.add(pipe_cmd);
  pipe_ex.add(pipe_cmd, false);

  // export-nist
  auto* en_cmd = app.add_subcommand("export-nist", "Split bits into ASCII sequence files for the NIST STS");
  std::string en_in;
  std::string en_out = "nist_export";
  std::size_t en_seqs = 80;
  std::size_t en_bits = 1'000'000;
  en_cmd->add_option("input", en_in, "Bit file")->required();
  en_cmd->add_option("-o,--output-dir", en_out, "Directory for the sequence files")->capture_default_str();
  en_cmd->add_option("--sequences", en_seqs, "Number of sequences")->capture_default_str();
  en_cmd->add_option("--bits", en_bits, "Bits per sequence")->capture_default_str();

  // export-testu01
  auto* eu_cmd = app.add_subcommand("export-testu01", "Packed MSB-first byte file for TestU01 bit batteries");
  std::string eu_in;
  std::string eu_out = "testu01.bin";
  std::size_t eu_min = 80'000'000;
  eu_cmd->add_option("input", eu_in, "Bit file")->required();
  eu_cmd->add_option("-o,--output", eu_out, "Output binary file")->capture_default_str();
  eu_cmd->add_option("--min-bits", eu_min, "Refuse inputs shorter than this")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*sim_cmd) {
      PipelineConfig cfg = base_config(sim_config);
      sim_over.apply(cfg.sim);
      if (!sim_mode.empty()) cfg.sim.mode = sim_mode == "bits" ? SimMode::bits : SimMode::heralded_g2;
      cfg.sim.validate();
      const TagStream tags = simulate(cfg.sim);
      write_tags(tags, sim_out);
      print_json({{"output", sim_out}, {"total_tags", tags.total_tags()}, {"duration_s", tags.duration_s()},
                  {"sha256", sha256_file(sim_out)}});
    } else if (*co_cmd) {
      const CoincidenceWindow w{co_width, co_bin};
      w.validate();
      const TagStream tags = read_tags(co_in);
      const auto events = find_coincidences(tags, w);
      write_events_csv(events, tags.duration_ps(), co_out);
      json j = {{"output", co_out}, {"events", events.size()}};
      if (!co_hist.empty()) {
        const auto h = correlation_histogram(tags.channel(ChannelId::U1), tags.channel(ChannelId::D2), w,
                                             tags.duration_ps());
        write_histogram_csv(h, co_hist);
        j["histogram"] = co_hist;
      }
      if (co_g2) j["heralded_g2"] = to_json(heralded_g2(tags, w));
      print_json(j);
    } else if (*bits_cmd) {
      const EventFile ev = read_events_csv(bits_in);
      const RawBitRecord rec = generate_raw_bits(
          ev.events, static_cast<double>(ev.duration_ps) / static_cast<double>(kPicosPerSecond), bits_in);
      write_bits(rec.bits, bits_out, bits_ascii ? BitFormat::ascii : BitFormat::packed);
      json j = to_json(rec);
      j["output"] = bits_out;
      print_json(j);
    } else if (*ent_cmd) {
      const BitBuffer bits = load_bits(ent_in);
      const auto rep =
          min_entropy_8bit(bits, ent_conservative ? EntropyEstimate::conservative : EntropyEstimate::plug_in);
      print_json(to_json(rep, extraction_ratio(rep, {ent_margin, ent_cap})));
    } else if (*ex_cmd) {
      ExtractorConfig cfg;
      ex_over.apply(cfg);
      cfg.validate();
      const BitBuffer raw = load_bits(ex_in);
      const BitBuffer out = extract(raw, cfg, threads);
      write_bits(out, ex_out, BitFormat::packed);
      print_json({{"output", ex_out},
                  {"input_bits", raw.size()},
                  {"blocks", raw.size() / cfg.block_bits},
                  {"output_bits", out.size()},
                  {"sha256", sha256_file(ex_out)}});
    } else if (*test_cmd) {
      if (test_bits == 0 || test_seqs == 0) throw ValidationError("--sequences and --bits must be positive");
      const BitBuffer bits = load_bits(test_in);
      if (bits.size() / test_bits < test_seqs)
        throw ValidationError("input holds " + std::to_string(bits.size() / test_bits) + " sequences of " +
                              std::to_string(test_bits) + " bits, " + std::to_string(test_seqs) + " requested");
      std::vector<BitBuffer> seqs;
      for (std::size_t i = 0; i < test_seqs; ++i) seqs.push_back(bits.slice(i * test_bits, test_bits));
      const TestReport rep = nist_subset(seqs, test_alpha, threads);
      if (test_table)
        std::cout << format_table(rep);
      else
        print_json(to_json(rep));
    } else if (*ac_cmd) {
      const BitBuffer bits = load_bits(ac_in);
      const auto rep = autocorrelation(bits, ac_lag);
      json j = to_json(rep);
      j["bound"] = 5.0 / std::sqrt(static_cast<double>(bits.size()));
      if (!ac_csv.empty()) {
        std::string csv = "lag,r\n";
        for (std::size_t i = 0; i < rep.lags.size(); ++i) {
          char line[64];
          std::snprintf(line, sizeof line, "%zu,%.10g\n", rep.lags[i], rep.r[i]);
          csv += line;
        }
        write_text(ac_csv, csv);
      }
      print_json(j);
    } else if (*pipe_cmd) {
      PipelineConfig cfg = base_config(pipe_config);
      pipe_sim.apply(cfg.sim);
      pipe_ex.apply(cfg.extractor);
      if (!pipe_out.empty()) cfg.output_dir = pipe_out;
      const json manifest = run_pipeline(cfg, threads);
      print_json({{"output_dir", cfg.output_dir.string()},
                  {"config_sha256", manifest["config_sha256"]},
                  {"summary", manifest["summary"]},
                  {"timings_s", manifest["timings_s"]}});
    } else if (*en_cmd) {
      if (en_bits == 0 || en_seqs == 0) throw ValidationError("--sequences and --bits must be positive");
      const BitBuffer bits = load_bits(en_in);
      if (bits.size() / en_bits < en_seqs)
        throw ValidationError("input holds " + std::to_string(bits.size() / en_bits) + " sequences of " +
                              std::to_string(en_bits) + " bits, " + std::to_string(en_seqs) + " requested");
      const fs::path dir = en_out;
      fs::create_directories(dir);
      json files = json::array();
      for (std::size_t i = 0; i < en_seqs; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "seq_%04zu.txt", i);
        write_bits(bits.slice(i * en_bits, en_bits), dir / name, BitFormat::ascii);
        files.push_back({{"path", name}, {"sha256", sha256_file(dir / name)}});
      }
      const json manifest = {{"source", en_in},
                             {"source_sha256", sha256_file(en_in)},
                             {"sequences", en_seqs},
                             {"bits_per_sequence", en_bits},
                             {"format", "ascii, one '0'/'1' per bit, no separators"},
                             {"files", files}};
      write_text(dir / "manifest.json", manifest.dump(2) + "\n");
      print_json({{"output_dir", en_out}, {"sequences", en_seqs}});
    } else if (*eu_cmd) {
      const BitBuffer bits = load_bits(eu_in);
      if (bits.size() < eu_min)
        throw ValidationError("input has " + std::to_string(bits.size()) + " bits, at least " +
                              std::to_string(eu_min) + " required");
      const auto bytes = bits.to_bytes();
      write_text(eu_out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bits.size() / 8));
      print_json({{"output", eu_out}, {"bits", bits.size() / 8 * 8}, {"sha256", sha256_file(eu_out)}});
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return classify(std::current_exception());
  }
  return kExitOk;
}
