#include "qrng/timetag.hpp"

#include "qrng/error.hpp"
#include "test_support.hpp"

namespace qrng {
namespace {

using test::TempDir;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> qtt1(std::uint64_t duration, const std::vector<std::pair<int, std::uint64_t>>& recs) {
  std::vector<std::uint8_t> out = {'Q', 'T', 'T', '1', 1, 4, 0, 0};
  put_u64(out, duration);
  put_u64(out, recs.size());
  for (const auto& [c, t] : recs) {
    out.push_back(static_cast<std::uint8_t>(c));
    put_u64(out, t);
  }
  return out;
}

TEST(TagStream, RejectsUnsortedChannel) {
  TagStream::ChannelTimes ch;
  ch[0] = {5, 3};
  EXPECT_THROW(TagStream(ch, 10), ValidationError);
}

TEST(TagStream, RejectsTagPastDuration) {
  TagStream::ChannelTimes ch;
  ch[2] = {11};
  EXPECT_THROW(TagStream(ch, 10), ValidationError);
}

TEST(TagStream, MergedOrderBreaksTiesByChannel) {
  TagStream::ChannelTimes ch;
  ch[index_of(ChannelId::D2)] = {5};
  ch[index_of(ChannelId::U1)] = {5, 7};
  ch[index_of(ChannelId::D1)] = {1};
  const TagStream s(ch, 10);
  const std::vector<TimeTag> expect = {
      {ChannelId::D1, 1}, {ChannelId::U1, 5}, {ChannelId::D2, 5}, {ChannelId::U1, 7}};
  EXPECT_EQ(s.merged(), expect);
  EXPECT_EQ(s.total_tags(), 4u);
}

TEST(Qtt1, RoundTrip) {
  TempDir dir;
  TagStream::ChannelTimes ch;
  ch[0] = {1, 5, 9};
  ch[1] = {5};
  ch[3] = {0, 2, 1'000'000'000'000ULL};
  const TagStream s(ch, 2'000'000'000'000ULL);
  write_tags(s, dir / "a.qtt");
  EXPECT_EQ(read_tags(dir / "a.qtt"), s);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.qtt"), kQtt1HeaderBytes + 7 * kQtt1RecordBytes);
}

TEST(Qtt1, HeaderLayout) {
  TempDir dir;
  TagStream::ChannelTimes ch;
  ch[2] = {258};
  write_tags(TagStream(ch, 1000), dir / "a.qtt");
  EXPECT_EQ(test::read_file(dir / "a.qtt"), qtt1(1000, {{2, 258}}));
}

TEST(Qtt1, BadMagic) {
  TempDir dir;
  auto bytes = qtt1(10, {{0, 1}});
  bytes[0] = bytes[1] = bytes[2] = bytes[3] = 'X';
  test::write_file(dir / "x.qtt", bytes);
  try {
    read_tags(dir / "x.qtt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Qtt1, TruncatedRecord) {
  TempDir dir;
  auto bytes = qtt1(10, {{0, 1}, {1, 2}});
  bytes.resize(bytes.size() - 3);
  test::write_file(dir / "t.qtt", bytes);
  EXPECT_THROW(read_tags(dir / "t.qtt"), ParseError);
}

TEST(Qtt1, DecreasingTimeWithinChannelNamesOffset) {
  TempDir dir;
  // Second record of channel 0 goes back in time; it starts at byte 24 + 2*9.
  test::write_file(dir / "d.qtt", qtt1(100, {{0, 10}, {1, 11}, {0, 5}}));
  try {
    read_tags(dir / "d.qtt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), kQtt1HeaderBytes + 2 * kQtt1RecordBytes);
  }
}

TEST(Qtt1, BadChannelCode) {
  TempDir dir;
  test::write_file(dir / "c.qtt", qtt1(100, {{7, 10}}));
  EXPECT_THROW(read_tags(dir / "c.qtt"), ParseError);
}

}  // namespace
}  // namespace qrng
