#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qrng/stats.hpp"
#include "qrng/timetag.hpp"

namespace qrng {

struct CoincidenceWindow {
  std::uint64_t width_ps = 1000;
  std::uint64_t bin_ps = 5;

  /// width > 0, bin > 0, width divisible by bin.
  void validate() const;
  std::size_t bin_count() const noexcept { return static_cast<std::size_t>(width_ps / bin_ps); }

  /// |dt| <= width/2, evaluated in doubled units so odd widths stay exact.
  bool contains(std::uint64_t dt) const noexcept { return 2 * dt <= width_ps; }
};

/// ZeroPair is the (U1,D2) coincidence, OnePair the (U2,D1) one.
enum class PairKind : std::uint8_t { zero_pair = 0, one_pair = 1 };

struct CoincidenceEvent {
  PairKind kind;
  std::uint64_t t_ps;  // earlier of the two matched tags

  friend bool operator==(const CoincidenceEvent&, const CoincidenceEvent&) = default;
};

struct MatchedPair {
  std::uint64_t t_a;
  std::uint64_t t_b;

  std::uint64_t t_min() const noexcept { return t_a < t_b ? t_a : t_b; }
  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

/// Greedy one-to-one matching. b is scanned in time order; each b-tag takes
/// the nearest unused a-tag inside the window, the earlier one on a tie.
/// Output is ordered by (min(t_a,t_b), t_a, t_b). Throws ValidationError on
/// unsorted input.
std::vector<MatchedPair> match(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                               const CoincidenceWindow& w);

/// Matches (U1,D2) and (U2,D1) independently and merges them in time order.
/// A ZeroPair and a OnePair at the same timestamp are both dropped.
std::vector<CoincidenceEvent> find_coincidences(const TagStream& stream, const CoincidenceWindow& w);

struct CorrelationHistogram {
  double first_edge_ps = 0.0;  // left edge of bin 0, equal to -width/2
  std::uint64_t bin_ps = 0;
  std::vector<std::uint64_t> counts;
  /// Expected accidental count per bin for uncorrelated streams,
  /// |a|·|b|·bin/duration; zero when no duration was given.
  double accidentals_per_bin = 0.0;

  double edge(std::size_t i) const noexcept { return first_edge_ps + static_cast<double>(i * bin_ps); }
  std::uint64_t total() const noexcept;
};

/// All-pairs histogram of t_b - t_a over [-width/2, +width/2) in bins of w.bin_ps.
CorrelationHistogram correlation_histogram(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                           const CoincidenceWindow& w, std::uint64_t duration_ps = 0);

struct G2Channels {
  ChannelId herald = ChannelId::D2;
  ChannelId signal_a = ChannelId::U1;
  ChannelId signal_b = ChannelId::U2;
};

struct HeraldedG2 {
  std::uint64_t heralds = 0;         // N_h
  std::uint64_t herald_a = 0;        // N_h1: heralds with a signal_a tag in the window
  std::uint64_t herald_b = 0;        // N_h2
  std::uint64_t herald_ab = 0;       // N_h12: heralds with both
  double g2 = 0.0;                   // N_h·N_h12 / (N_h1·N_h2)
};

/// Three-detector heralded g2(0). Each herald tag is gated against both signal
/// channels with the window. Throws InsufficientStatistics if N_h1 or N_h2 is 0.
HeraldedG2 heralded_g2(const TagStream& stream, const CoincidenceWindow& w, const G2Channels& channels = {});

struct HeraldingEfficiency {
  double zero_pair;  // matches(U1,D2) / singles(D2)
  double one_pair;   // matches(U2,D1) / singles(D1)
};

/// Raw ratio without accidental subtraction. Throws InsufficientStatistics
/// when either herald channel is empty.
HeraldingEfficiency heralding_efficiency(const TagStream& stream, const CoincidenceWindow& w);

struct G2WindowPoint {
  std::uint64_t width_ps;
  double g2;
};

struct G2WindowScan {
  std::vector<G2WindowPoint> points;
  std::optional<LinearFit> fit_per_ns;  // g2 against width in ns; empty for a single width
};

/// heralded_g2 at each width. Widths must be strictly ascending; the bin size
/// is irrelevant here and fixed at 1 ps.
G2WindowScan g2_vs_window(const TagStream& stream, std::span<const std::uint64_t> widths_ps,
                          const G2Channels& channels = {});

}  // namespace qrng
