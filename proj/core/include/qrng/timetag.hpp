#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace qrng {

inline constexpr std::uint64_t kPicosPerSecond = 1'000'000'000'000ULL;

/// The four sections of the down-conversion ring. The numeric values are the
/// on-disk channel codes.
enum class ChannelId : std::uint8_t { U1 = 0, U2 = 1, D1 = 2, D2 = 3 };

inline constexpr std::size_t kChannelCount = 4;
inline constexpr std::array<ChannelId, kChannelCount> kAllChannels = {ChannelId::U1, ChannelId::U2, ChannelId::D1,
                                                                      ChannelId::D2};

constexpr std::size_t index_of(ChannelId c) noexcept { return static_cast<std::size_t>(c); }

/// Diametrically opposite section. (U1,D2) and (U2,D1) are the only pairings.
constexpr ChannelId opposite(ChannelId c) noexcept {
  switch (c) {
    case ChannelId::U1: return ChannelId::D2;
    case ChannelId::D2: return ChannelId::U1;
    case ChannelId::U2: return ChannelId::D1;
    case ChannelId::D1: return ChannelId::U2;
  }
  return c;
}

std::string_view to_string(ChannelId c) noexcept;

struct TimeTag {
  ChannelId channel;
  std::uint64_t t_ps;  // picoseconds since acquisition start

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

enum class StreamOrigin : std::uint8_t { simulated, imported };

/// Detection events split per channel. Construction validates that every
/// channel is sorted non-decreasing and that no tag exceeds the acquisition
/// duration; a TagStream that exists is always valid.
class TagStream {
 public:
  using ChannelTimes = std::array<std::vector<std::uint64_t>, kChannelCount>;

  TagStream() = default;
  TagStream(ChannelTimes channels, std::uint64_t duration_ps, StreamOrigin origin = StreamOrigin::imported);

  /// Groups `tags` per channel, preserving their order; per-channel order must
  /// already be non-decreasing.
  static TagStream from_tags(std::span<const TimeTag> tags, std::uint64_t duration_ps,
                             StreamOrigin origin = StreamOrigin::imported);

  const std::vector<std::uint64_t>& channel(ChannelId c) const noexcept { return channels_[index_of(c)]; }
  std::uint64_t duration_ps() const noexcept { return duration_ps_; }
  double duration_s() const noexcept { return static_cast<double>(duration_ps_) / static_cast<double>(kPicosPerSecond); }
  StreamOrigin origin() const noexcept { return origin_; }
  std::size_t total_tags() const noexcept;

  /// All tags ordered by time, ties broken by channel code.
  std::vector<TimeTag> merged() const;

  /// Equality compares content (channels and duration); origin is provenance only.
  friend bool operator==(const TagStream& a, const TagStream& b) {
    return a.duration_ps_ == b.duration_ps_ && a.channels_ == b.channels_;
  }

 private:
  ChannelTimes channels_{};
  std::uint64_t duration_ps_ = 0;
  StreamOrigin origin_ = StreamOrigin::imported;
};

/// QTT1 layout: "QTT1", version u8 = 1, channel_count u8 = 4, reserved u16 = 0,
/// acquisition_duration u64 LE, record_count u64 LE, then record_count records
/// of channel u8 + t u64 LE, globally ordered by (t, channel).
inline constexpr std::size_t kQtt1HeaderBytes = 24;
inline constexpr std::size_t kQtt1RecordBytes = 9;

void write_tags(const TagStream& stream, const std::filesystem::path& destination);
TagStream read_tags(const std::filesystem::path& source);

}  // namespace qrng
