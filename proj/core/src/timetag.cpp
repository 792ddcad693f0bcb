#include "qrng/timetag.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "binary_io.hpp"
#include "qrng/error.hpp"

namespace qrng {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'Q', 'T', 'T', '1'};
constexpr std::uint8_t kVersion = 1;

void check_channel(const std::vector<std::uint64_t>& times, ChannelId c, std::uint64_t duration_ps) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && times[i] < times[i - 1])
      throw ValidationError("TagStream: channel " + std::string(to_string(c)) + " not sorted at index " +
                            std::to_string(i));
    if (times[i] > duration_ps)
      throw ValidationError("TagStream: channel " + std::string(to_string(c)) + " tag at index " + std::to_string(i) +
                            " exceeds acquisition duration");
  }
}

}  // namespace

std::string_view to_string(ChannelId c) noexcept {
  switch (c) {
    case ChannelId::U1: return "U1";
    case ChannelId::U2: return "U2";
    case ChannelId::D1: return "D1";
    case ChannelId::D2: return "D2";
  }
  return "?";
}

TagStream::TagStream(ChannelTimes channels, std::uint64_t duration_ps, StreamOrigin origin)
    : channels_(std::move(channels)), duration_ps_(duration_ps), origin_(origin) {
  for (ChannelId c : kAllChannels) check_channel(channels_[index_of(c)], c, duration_ps_);
}

TagStream TagStream::from_tags(std::span<const TimeTag> tags, std::uint64_t duration_ps, StreamOrigin origin) {
  ChannelTimes channels;
  for (const TimeTag& tag : tags) {
    if (index_of(tag.channel) >= kChannelCount) throw ValidationError("TagStream: invalid channel code");
    channels[index_of(tag.channel)].push_back(tag.t_ps);
  }
  return TagStream(std::move(channels), duration_ps, origin);
}

std::size_t TagStream::total_tags() const noexcept {
  std::size_t n = 0;
  for (const auto& ch : channels_) n += ch.size();
  return n;
}

std::vector<TimeTag> TagStream::merged() const {
  std::vector<TimeTag> out;
  out.reserve(total_tags());
  std::array<std::size_t, kChannelCount> pos{};
  while (true) {
    int best = -1;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      if (pos[c] == channels_[c].size()) continue;
      // Strict comparison keeps the lower channel code on ties.
      if (best < 0 || channels_[c][pos[c]] < channels_[static_cast<std::size_t>(best)][pos[static_cast<std::size_t>(best)]])
        best = static_cast<int>(c);
    }
    if (best < 0) break;
    const auto b = static_cast<std::size_t>(best);
    out.push_back({static_cast<ChannelId>(b), channels_[b][pos[b]++]});
  }
  return out;
}

void write_tags(const TagStream& stream, const std::filesystem::path& destination) {
  const std::vector<TimeTag> tags = stream.merged();
  auto f = detail::open_file(destination, "wb");

  std::array<std::uint8_t, kQtt1HeaderBytes> header{};
  std::memcpy(header.data(), kMagic.data(), 4);
  header[4] = kVersion;
  header[5] = static_cast<std::uint8_t>(kChannelCount);
  detail::put_u16_le(header.data() + 6, 0);
  detail::put_u64_le(header.data() + 8, stream.duration_ps());
  detail::put_u64_le(header.data() + 16, tags.size());
  detail::write_all(f.get(), header, destination);

  std::vector<std::uint8_t> buf;
  buf.reserve(kQtt1RecordBytes * 65536);
  for (const TimeTag& tag : tags) {
    std::uint8_t rec[kQtt1RecordBytes];
    rec[0] = static_cast<std::uint8_t>(tag.channel);
    detail::put_u64_le(rec + 1, tag.t_ps);
    buf.insert(buf.end(), rec, rec + kQtt1RecordBytes);
    if (buf.size() >= kQtt1RecordBytes * 65536) {
      detail::write_all(f.get(), buf, destination);
      buf.clear();
    }
  }
  detail::write_all(f.get(), buf, destination);
  if (std::fflush(f.get()) != 0) throw IoError("flush failed on '" + destination.string() + "'");
}

TagStream read_tags(const std::filesystem::path& source) {
  const std::vector<std::uint8_t> data = detail::slurp(source);
  if (data.size() < 4 || std::memcmp(data.data(), kMagic.data(), 4) != 0) throw ParseError("bad magic, expected QTT1", 0);
  if (data.size() < kQtt1HeaderBytes) throw ParseError("truncated header", data.size());
  if (data[4] != kVersion) throw ParseError("unsupported QTT1 version " + std::to_string(data[4]), 4);
  if (data[5] != kChannelCount) throw ParseError("channel_count must be 4", 5);
  if (detail::get_u16_le(data.data() + 6) != 0) throw ParseError("reserved field must be zero", 6);
  const std::uint64_t duration = detail::get_u64_le(data.data() + 8);
  const std::uint64_t count = detail::get_u64_le(data.data() + 16);

  const std::uint64_t body = data.size() - kQtt1HeaderBytes;
  if (body / kQtt1RecordBytes < count) {
    const std::uint64_t complete = body / kQtt1RecordBytes;
    throw ParseError("truncated record " + std::to_string(complete), kQtt1HeaderBytes + complete * kQtt1RecordBytes);
  }
  if (body != count * kQtt1RecordBytes)
    throw ParseError("trailing bytes after last record", kQtt1HeaderBytes + count * kQtt1RecordBytes);

  TagStream::ChannelTimes channels;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t off = kQtt1HeaderBytes + i * kQtt1RecordBytes;
    const std::uint8_t code = data[off];
    if (code >= kChannelCount) throw ParseError("invalid channel code " + std::to_string(code), off);
    const std::uint64_t t = detail::get_u64_le(data.data() + off + 1);
    auto& ch = channels[code];
    if (!ch.empty() && t < ch.back())
      throw ParseError("channel " + std::string(to_string(static_cast<ChannelId>(code))) + " not sorted", off);
    if (t > duration) throw ParseError("tag beyond acquisition duration", off);
    ch.push_back(t);
  }
  return TagStream(std::move(channels), duration, StreamOrigin::imported);
}

}  // namespace qrng
