#include "qrng/pipeline.hpp"

#include <fstream>

#include "qrng/error.hpp"
#include "qrng/hash.hpp"
#include "test_support.hpp"

namespace qrng {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

PipelineConfig minimal(const fs::path& out) {
  PipelineConfig c;
  c.sim.pump_power_mw = 17.0;
  c.sim.duration_s = 0.01;
  c.extractor.block_bits = 5000;
  c.extractor.seed_key = 3;
  c.stats.sequence_bits = 2000;
  c.stats.sequence_count = 5;
  c.characterization.g2_duration_s = 0.01;
  c.output_dir = out;
  return c;
}

std::map<std::string, std::string> artifact_hashes(const json& manifest) {
  std::map<std::string, std::string> h;
  for (const auto& s : manifest.at("stages"))
    for (const auto& o : s.at("outputs")) h[o.at("path")] = o.at("sha256");
  return h;
}

TEST(Pipeline, MinimalRunListsSevenStages) {
  test::TempDir dir;
  const auto m = run_pipeline(minimal(dir / "run"));
  std::vector<std::string> names;
  for (const auto& s : m.at("stages")) names.push_back(s.at("name"));
  const std::vector<std::string> expect = {"simulate", "coincide", "bits", "entropy", "extract", "test", "autocorr"};
  EXPECT_EQ(names, expect);
  for (const auto& [path, hash] : artifact_hashes(m)) {
    EXPECT_TRUE(fs::exists(dir / "run" / path)) << path;
    EXPECT_EQ(sha256_file(dir / "run" / path), hash) << path;
    EXPECT_FALSE(fs::exists(dir / "run" / (path + ".partial"))) << path;
  }
  EXPECT_TRUE(fs::exists(dir / "run" / "manifest.json"));
  EXPECT_EQ(m.at("config_sha256"), config_hash(minimal(dir / "run")));
  EXPECT_EQ(m.at("seed"), 1);
  EXPECT_TRUE(m.at("timings_s").contains("extract"));
  EXPECT_GT(m.at("summary").at("raw_bits").get<std::size_t>(), 0u);
}

TEST(Pipeline, ManifestMatchesFileOnDisk) {
  test::TempDir dir;
  const auto m = run_pipeline(minimal(dir / "run"));
  std::ifstream in(dir / "run" / "manifest.json");
  EXPECT_EQ(json::parse(in), m);
}

TEST(Pipeline, DeterministicAcrossRunsAndThreads) {
  test::TempDir dir;
  const auto a = run_pipeline(minimal(dir / "a"), 1);
  const auto b = run_pipeline(minimal(dir / "b"), 3);
  EXPECT_EQ(artifact_hashes(a), artifact_hashes(b));
  EXPECT_EQ(a.at("config_sha256"), b.at("config_sha256"));
}

TEST(Pipeline, FailingStageKeepsPartialAndNamesStage) {
  test::TempDir dir;
  auto c = minimal(dir / "run");
  c.extractor.block_bits = 50'000'000;  // more than the run produces
  try {
    run_pipeline(c);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "extract");
    EXPECT_NE(std::string(e.what()).find("extract"), std::string::npos);
    EXPECT_THROW(std::rethrow_exception(e.cause()), ValidationError);
  }
  EXPECT_TRUE(fs::exists(dir / "run" / "raw.qbb"));
  EXPECT_FALSE(fs::exists(dir / "run" / "manifest.json"));
}

TEST(Pipeline, TooFewBitsSkipsTests) {
  test::TempDir dir;
  auto c = minimal(dir / "run");
  c.stats.sequence_bits = 10'000'000;
  const auto m = run_pipeline(c);
  for (const auto& s : m.at("stages"))
    if (s.at("name") == "test") EXPECT_TRUE(s.at("metrics").contains("skipped"));
}

TEST(Pipeline, CharacterizationAndSweepStages) {
  test::TempDir dir;
  auto c = minimal(dir / "run");
  c.characterization.powers_mw = {1, 5};
  c.sweep.powers_mw = {1, 2};
  c.sweep.segment_duration_s = 0.02;
  c.extractor.block_bits = 2000;
  const auto m = run_pipeline(c);
  EXPECT_EQ(m.at("stages").size(), 9u);
  for (const char* f : {"fig2a.csv", "fig2b.csv", "fig3.csv", "fig5.csv"}) EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  std::ifstream in(dir / "run" / "fig3.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "power_mw,h_inf_per_bit,bitrate_hz");
}

TEST(PowerSweep, ScaledSegmentsKeepEmissionCount) {
  PipelineConfig c;
  c.sweep.powers_mw = {1, 4};
  c.sweep.segment_duration_s = 0.04;
  c.extractor.block_bits = 2000;
  const auto r = power_sweep(c);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_DOUBLE_EQ(r.points[0].duration_s, 0.04);
  EXPECT_DOUBLE_EQ(r.points[1].duration_s, 0.01);
  EXPECT_LT(r.points[1].raw_bits, r.points[0].raw_bits);
  EXPECT_GT(r.points[1].raw_bits, r.points[0].raw_bits * 7 / 10);
}

}  // namespace
}  // namespace qrng
