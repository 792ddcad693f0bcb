#include "qrng/report_io.hpp"

#include <fstream>

#include "qrng/error.hpp"
#include "qrng/hash.hpp"
#include "test_support.hpp"

namespace qrng {
namespace {

TEST(EventsCsv, RoundTrip) {
  test::TempDir dir;
  const std::vector<CoincidenceEvent> ev = {{PairKind::zero_pair, 10}, {PairKind::one_pair, 20}, {PairKind::one_pair, 20}};
  write_events_csv(ev, 1000, dir / "e.csv");
  const auto bytes = test::read_file(dir / "e.csv");
  EXPECT_EQ(std::string(bytes.begin(), bytes.end()), "# duration_ps=1000\nt_ps,kind\n10,0\n20,1\n20,1\n");
  const auto back = read_events_csv(dir / "e.csv");
  EXPECT_EQ(back.events, ev);
  EXPECT_EQ(back.duration_ps, 1000u);
}

TEST(EventsCsv, Errors) {
  test::TempDir dir;
  auto check = [&](const std::string& text) {
    std::ofstream(dir / "x.csv") << text;
    EXPECT_THROW(read_events_csv(dir / "x.csv"), ParseError) << text;
  };
  check("t_ps,kind\n1,0\n");
  check("# duration_ps=10\n1,0\n");
  check("# duration_ps=10\nt_ps,kind\n1,2\n");
  check("# duration_ps=10\nt_ps,kind\n5,0\n4,1\n");
  check("# duration_ps=10\nt_ps,kind\nabc,0\n");
}

TEST(HistogramCsv, Layout) {
  test::TempDir dir;
  CorrelationHistogram h;
  h.first_edge_ps = -10;
  h.bin_ps = 5;
  h.counts = {1, 2, 3, 4};
  write_histogram_csv(h, dir / "h.csv");
  const auto bytes = test::read_file(dir / "h.csv");
  EXPECT_EQ(std::string(bytes.begin(), bytes.end()), "offset_ps,count\n-10,1\n-5,2\n0,3\n5,4\n");
}

TEST(Hash, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  test::TempDir dir;
  write_text(dir / "a.txt", "abc");
  EXPECT_EQ(sha256_file(dir / "a.txt"), sha256_hex(std::string_view("abc")));
}

TEST(ReportJson, EntropyCarriesRatio) {
  EntropyReport r;
  r.h_inf_per_bit = 0.97;
  const auto j = to_json(r, 0.95);
  EXPECT_EQ(j.at("extraction_ratio"), 0.95);
  EXPECT_EQ(j.at("histogram").size(), 256u);
}

}  // namespace
}  // namespace qrng
