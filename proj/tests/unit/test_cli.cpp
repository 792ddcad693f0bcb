#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "qrng/bit_buffer.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd = "cd '" + dir.string() + "' && '" QRNG_CLI_PATH "' " + args + " > '" + out.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  const auto bytes = qrng::test::read_file(out);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::string(bytes.begin(), bytes.end())};
}

TEST(Cli, HelpDocumentsEverySubcommand) {
  qrng::test::TempDir dir;
  const auto r = run("--help", dir.path());
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"simulate", "coincide", "bits", "entropy", "extract", "test", "autocorr", "pipeline",
                          "export-nist", "export-testu01"})
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  const auto ex = run("extract --help", dir.path());
  EXPECT_EQ(ex.code, 0);
  for (const char* flag : {"--block-bits", "--ratio", "--seed-key", "1000000", "0.95"})
    EXPECT_NE(ex.out.find(flag), std::string::npos) << flag;
}

TEST(Cli, UnknownFlagIsUsageError) {
  qrng::test::TempDir dir;
  const auto r = run("entropy x.qbb --bogus", dir.path());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("bogus"), std::string::npos);
}

TEST(Cli, MissingInputIsIoError) {
  qrng::test::TempDir dir;
  EXPECT_EQ(run("entropy missing.qbb", dir.path()).code, 2);
}

TEST(Cli, CorruptTagFileIsIoError) {
  qrng::test::TempDir dir;
  std::ofstream(dir / "bad.qtt") << "XXXX garbage";
  EXPECT_EQ(run("coincide bad.qtt", dir.path()).code, 2);
}

TEST(Cli, BadValueIsValidationError) {
  qrng::test::TempDir dir;
  qrng::write_bits(qrng::test::random_bits(5000, 1), dir / "raw.qbb", qrng::BitFormat::packed);
  EXPECT_EQ(run("extract raw.qbb --block-bits 1000 --ratio 1.5", dir.path()).code, 1);
  EXPECT_EQ(run("export-testu01 raw.qbb", dir.path()).code, 1);
}

TEST(Cli, StageByStageMatchesDefinitions) {
  qrng::test::TempDir dir;
  ASSERT_EQ(run("simulate --power-mw 17 --duration-s 0.01 -o tags.qtt", dir.path()).code, 0);
  ASSERT_EQ(run("coincide tags.qtt -o events.csv --histogram hist.csv", dir.path()).code, 0);
  ASSERT_EQ(run("bits events.csv -o raw.qbb", dir.path()).code, 0);
  const auto ent = run("entropy raw.qbb", dir.path());
  ASSERT_EQ(ent.code, 0);
  const auto j = nlohmann::json::parse(ent.out);
  EXPECT_TRUE(j.contains("h_inf_per_bit"));
  EXPECT_TRUE(j.contains("histogram"));

  const auto raw = qrng::read_bits(dir / "raw.qbb", qrng::BitFormat::packed);
  ASSERT_EQ(run("extract raw.qbb --block-bits 10000 --ratio 0.95 --seed-key 42", dir.path()).code, 0);
  const auto out = qrng::read_bits(dir / "out.qbb", qrng::BitFormat::packed);
  EXPECT_EQ(out.size(), raw.size() / 10000 * 9500);

  ASSERT_EQ(run("autocorr out.qbb --max-lag 5 --csv fig5.csv", dir.path()).code, 0);
  EXPECT_TRUE(fs::exists(dir / "fig5.csv"));
  const auto t = run("test out.qbb --sequences 2 --bits 10000", dir.path());
  ASSERT_EQ(t.code, 0);
  EXPECT_EQ(nlohmann::json::parse(t.out).at("sequences"), 2);
}

TEST(Cli, ExportNist) {
  qrng::test::TempDir dir;
  qrng::write_bits(qrng::test::random_bits(8000, 2), dir / "out.qbb", qrng::BitFormat::packed);
  ASSERT_EQ(run("export-nist out.qbb --sequences 8 --bits 1000 -o nist", dir.path()).code, 0);
  for (int i = 0; i < 8; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seq_%04d.txt", i);
    EXPECT_EQ(fs::file_size(dir / "nist" / name), 1000u);
  }
  EXPECT_TRUE(fs::exists(dir / "nist" / "manifest.json"));
  EXPECT_EQ(run("export-nist out.qbb --sequences 9 --bits 1000", dir.path()).code, 1);
}

TEST(Cli, ExportTestU01) {
  qrng::test::TempDir dir;
  const auto bits = qrng::test::random_bits(8003, 3);
  qrng::write_bits(bits, dir / "out.qbb", qrng::BitFormat::packed);
  ASSERT_EQ(run("export-testu01 out.qbb --min-bits 8000 -o t.bin", dir.path()).code, 0);
  const auto bytes = qrng::test::read_file(dir / "t.bin");
  ASSERT_EQ(bytes.size(), 1000u);
  EXPECT_EQ(qrng::BitBuffer::from_bytes(bytes, 8000), bits.slice(0, 8000));
}

TEST(Cli, PipelineWithOverrides) {
  qrng::test::TempDir dir;
  const auto r = run("--threads 2 pipeline -c '" QRNG_CONFIG_DIR "/preset_1mw.json' --duration-s 0.06 -o run",
                     dir.path());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(dir / "run" / "manifest.json");
  const auto m = nlohmann::json::parse(in);
  EXPECT_EQ(m.at("config").at("sim").at("duration_s"), 0.06);
}

}  // namespace
