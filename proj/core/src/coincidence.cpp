#include "qrng/coincidence.hpp"

#include <algorithm>
#include <string>

#include "qrng/error.hpp"

namespace qrng {

namespace {

void require_sorted(std::span<const std::uint64_t> v, const char* name) {
  const auto it = std::is_sorted_until(v.begin(), v.end());
  if (it != v.end())
    throw ValidationError(std::string(name) + " not sorted at index " + std::to_string(it - v.begin()));
}

bool pair_less(const MatchedPair& x, const MatchedPair& y) {
  const auto kx = x.t_min();
  const auto ky = y.t_min();
  if (kx != ky) return kx < ky;
  if (x.t_a != y.t_a) return x.t_a < y.t_a;
  return x.t_b < y.t_b;
}

// Does any tag of `sig` lie within the window of `t`? `pos` only moves forward.
bool gate(std::span<const std::uint64_t> sig, std::size_t& pos, std::uint64_t t, const CoincidenceWindow& w) {
  while (pos < sig.size() && sig[pos] < t && !w.contains(t - sig[pos])) ++pos;
  if (pos == sig.size()) return false;
  return sig[pos] <= t || w.contains(sig[pos] - t);
}

}  // namespace

void CoincidenceWindow::validate() const {
  if (width_ps == 0) throw ValidationError("CoincidenceWindow: width must be > 0");
  if (bin_ps == 0) throw ValidationError("CoincidenceWindow: bin must be > 0");
  if (width_ps % bin_ps != 0) throw ValidationError("CoincidenceWindow: width must be divisible by bin");
}

std::vector<MatchedPair> match(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                               const CoincidenceWindow& w) {
  w.validate();
  require_sorted(a, "match: a");
  require_sorted(b, "match: b");

  std::vector<MatchedPair> out;
  std::vector<std::uint8_t> used(a.size(), 0);
  std::size_t lo = 0;  // a[lo..] may still fall inside a future window
  std::size_t p = 0;   // first a-tag at or after the current b-tag
  constexpr std::size_t none = static_cast<std::size_t>(-1);

  for (const std::uint64_t tb : b) {
    while (lo < a.size() && (used[lo] || (a[lo] < tb && !w.contains(tb - a[lo])))) ++lo;
    p = std::max(p, lo);
    while (p < a.size() && a[p] < tb) ++p;

    std::size_t left = none;
    for (std::size_t i = p; i > lo;) {
      if (!used[--i]) {
        left = i;
        break;
      }
    }
    // Equal timestamps: the lowest unused index counts as the earlier tag.
    if (left != none)
      for (std::size_t k = left; k > lo && a[k - 1] == a[left];)
        if (!used[--k]) left = k;

    std::size_t right = none;
    for (std::size_t j = p; j < a.size() && w.contains(a[j] - tb); ++j) {
      if (!used[j]) {
        right = j;
        break;
      }
    }

    std::size_t pick = left;
    if (right != none && (left == none || a[right] - tb < tb - a[left])) pick = right;
    if (pick == none) continue;
    used[pick] = 1;
    out.push_back({a[pick], tb});
  }

  if (!std::is_sorted(out.begin(), out.end(), pair_less)) std::sort(out.begin(), out.end(), pair_less);
  return out;
}

std::vector<CoincidenceEvent> find_coincidences(const TagStream& stream, const CoincidenceWindow& w) {
  const auto zero = match(stream.channel(ChannelId::U1), stream.channel(ChannelId::D2), w);
  const auto one = match(stream.channel(ChannelId::U2), stream.channel(ChannelId::D1), w);

  std::vector<CoincidenceEvent> out;
  out.reserve(zero.size() + one.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < zero.size() || j < one.size()) {
    const std::uint64_t tz = i < zero.size() ? zero[i].t_min() : UINT64_MAX;
    const std::uint64_t to = j < one.size() ? one[j].t_min() : UINT64_MAX;
    if (i < zero.size() && j < one.size() && tz == to) {
      // Cross-kind tie: drop every event at this timestamp.
      while (i < zero.size() && zero[i].t_min() == tz) ++i;
      while (j < one.size() && one[j].t_min() == tz) ++j;
    } else if (j == one.size() || (i < zero.size() && tz < to)) {
      out.push_back({PairKind::zero_pair, tz});
      ++i;
    } else {
      out.push_back({PairKind::one_pair, to});
      ++j;
    }
  }
  return out;
}

std::uint64_t CorrelationHistogram::total() const noexcept {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

CorrelationHistogram correlation_histogram(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                           const CoincidenceWindow& w, std::uint64_t duration_ps) {
  w.validate();
  require_sorted(a, "correlation_histogram: a");
  require_sorted(b, "correlation_histogram: b");

  CorrelationHistogram h;
  h.first_edge_ps = -0.5 * static_cast<double>(w.width_ps);
  h.bin_ps = w.bin_ps;
  h.counts.assign(w.bin_count(), 0);
  if (duration_ps > 0)
    h.accidentals_per_bin = static_cast<double>(a.size()) * static_cast<double>(b.size()) *
                            static_cast<double>(w.bin_ps) / static_cast<double>(duration_ps);

  // Offsets in doubled units: 2(t_b - t_a) + width lies in [0, 2·width).
  const std::uint64_t width = w.width_ps;
  const std::uint64_t two_bin = 2 * w.bin_ps;
  std::size_t start = 0;
  for (const std::uint64_t ta : a) {
    while (start < b.size() && 2 * b[start] + width < 2 * ta) ++start;
    for (std::size_t k = start; k < b.size() && 2 * b[k] < 2 * ta + width; ++k) {
      const std::uint64_t shifted = 2 * b[k] + width - 2 * ta;
      ++h.counts[shifted / two_bin];
    }
  }
  return h;
}

HeraldedG2 heralded_g2(const TagStream& stream, const CoincidenceWindow& w, const G2Channels& channels) {
  w.validate();
  const auto& herald = stream.channel(channels.herald);
  const auto& sig_a = stream.channel(channels.signal_a);
  const auto& sig_b = stream.channel(channels.signal_b);

  HeraldedG2 r;
  r.heralds = herald.size();
  std::size_t pa = 0;
  std::size_t pb = 0;
  for (const std::uint64_t t : herald) {
    const bool ha = gate(sig_a, pa, t, w);
    const bool hb = gate(sig_b, pb, t, w);
    r.herald_a += ha;
    r.herald_b += hb;
    r.herald_ab += ha && hb;
  }
  if (r.herald_a == 0 || r.herald_b == 0)
    throw InsufficientStatistics("heralded_g2: no herald-signal coincidences on one of the split channels");
  r.g2 = static_cast<double>(r.heralds) * static_cast<double>(r.herald_ab) /
         (static_cast<double>(r.herald_a) * static_cast<double>(r.herald_b));
  return r;
}

HeraldingEfficiency heralding_efficiency(const TagStream& stream, const CoincidenceWindow& w) {
  const auto& d2 = stream.channel(ChannelId::D2);
  const auto& d1 = stream.channel(ChannelId::D1);
  if (d2.empty() || d1.empty()) throw InsufficientStatistics("heralding_efficiency: a herald channel has no singles");
  const auto zero = match(stream.channel(ChannelId::U1), d2, w);
  const auto one = match(stream.channel(ChannelId::U2), d1, w);
  return {static_cast<double>(zero.size()) / static_cast<double>(d2.size()),
          static_cast<double>(one.size()) / static_cast<double>(d1.size())};
}

G2WindowScan g2_vs_window(const TagStream& stream, std::span<const std::uint64_t> widths_ps,
                          const G2Channels& channels) {
  if (widths_ps.empty()) throw ValidationError("g2_vs_window: no widths given");
  for (std::size_t i = 1; i < widths_ps.size(); ++i)
    if (widths_ps[i] <= widths_ps[i - 1]) throw ValidationError("g2_vs_window: widths must be strictly ascending");

  G2WindowScan scan;
  std::vector<double> x;
  std::vector<double> y;
  for (const std::uint64_t width : widths_ps) {
    const HeraldedG2 g = heralded_g2(stream, CoincidenceWindow{width, 1}, channels);
    scan.points.push_back({width, g.g2});
    x.push_back(static_cast<double>(width) * 1e-3);
    y.push_back(g.g2);
  }
  if (x.size() >= 2) scan.fit_per_ns = fit_linear(x, y);
  return scan;
}

}  // namespace qrng
