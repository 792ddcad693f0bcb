#include "qrng/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "qrng/error.hpp"

namespace qrng {

using json = nlohmann::json;

json to_json(const EntropyReport& r, std::optional<double> ratio) {
  json j = {{"n_blocks", r.n_blocks},
            {"p_max", r.p_max},
            {"h_inf_block", r.h_inf_block},
            {"h_inf_per_bit", r.h_inf_per_bit},
            {"estimate", r.estimate == EntropyEstimate::plug_in ? "plug_in" : "conservative"},
            {"histogram", r.counts}};
  if (ratio) j["extraction_ratio"] = *ratio;
  return j;
}

json to_json(const RawBitRecord& r) {
  json j = {{"bit_len", r.bits.size()},
            {"zero_pairs", r.zero_pairs},
            {"one_pairs", r.one_pairs},
            {"duration_s", r.duration_s},
            {"bit_rate_hz", r.bit_rate_hz()},
            {"source", r.source}};
  j["bias"] = r.bits.empty() ? json(nullptr) : json(bias(r));
  return j;
}

json to_json(const TestReport& r) {
  json tests = json::array();
  for (const auto& t : r.tests) {
    json row = {{"name", t.name}, {"pass", t.pass()}};
    if (!t.skipped.empty()) {
      row["skipped"] = t.skipped;
    } else {
      row["p_values"] = t.p_values;
      row["passed"] = t.passed;
      row["proportion"] = t.proportion;
      row["proportion_range"] = {t.lo, t.hi};
      row["proportion_ok"] = t.proportion_ok;
      row["p_t"] = t.uniformity.p_t;
      row["ks_statistic"] = t.uniformity.ks_statistic;
      row["ks_p_value"] = t.uniformity.ks_p_value;
      row["uniformity_ok"] = t.uniformity_ok;
    }
    tests.push_back(std::move(row));
  }
  return {{"alpha", r.alpha}, {"sequences", r.sequences}, {"all_passed", r.all_passed()}, {"tests", tests}};
}

json to_json(const AutocorrReport& r) {
  return {{"lags", r.lags}, {"r", r.r}, {"mean", r.mean}, {"stddev", r.stddev}};
}

json to_json(const HeraldedG2& g) {
  return {{"heralds", g.heralds},   {"herald_a", g.herald_a}, {"herald_b", g.herald_b},
          {"herald_ab", g.herald_ab}, {"g2", g.g2}};
}

json to_json(const HeraldingEfficiency& e) { return {{"zero_pair", e.zero_pair}, {"one_pair", e.one_pair}}; }

json to_json(const LinearFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}}; }

json to_json(const G2WindowScan& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back({{"width_ps", p.width_ps}, {"g2", p.g2}});
  json j = {{"points", pts}};
  j["fit_per_ns"] = s.fit_per_ns ? to_json(*s.fit_per_ns) : json(nullptr);
  return j;
}

std::string format_table(const TestReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %10s %10s %12s %10s  %s\n", "test", "passed", "proportion", "range_lo",
                "P_T", "verdict");
  os << line;
  for (const auto& t : r.tests) {
    if (!t.skipped.empty()) {
      std::snprintf(line, sizeof line, "%-26s %10s %10s %12s %10s  skipped (%s)\n", t.name.c_str(), "-", "-", "-",
                    "-", t.skipped.c_str());
    } else {
      const std::string frac = std::to_string(t.passed) + "/" + std::to_string(t.p_values.size());
      std::snprintf(line, sizeof line, "%-26s %10s %10.4f %12.4f %10.4g  %s\n", t.name.c_str(), frac.c_str(),
                    t.proportion, t.lo, t.uniformity.p_t, t.pass() ? "PASS" : "FAIL");
    }
    os << line;
  }
  return os.str();
}

void write_text(const std::filesystem::path& destination, std::string_view text) {
  auto f = detail::open_file(destination, "wb");
  detail::write_all(f.get(), {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}, destination);
  if (std::fflush(f.get()) != 0) throw IoError("flush failed on '" + destination.string() + "'");
}

void write_events_csv(std::span<const CoincidenceEvent> events, std::uint64_t duration_ps,
                      const std::filesystem::path& destination) {
  std::string out = "# duration_ps=" + std::to_string(duration_ps) + "\nt_ps,kind\n";
  out.reserve(out.size() + events.size() * 16);
  char buf[32];
  for (const auto& e : events) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, e.t_ps);
    out.append(buf, end);
    out += e.kind == PairKind::zero_pair ? ",0\n" : ",1\n";
  }
  write_text(destination, out);
}

EventFile read_events_csv(const std::filesystem::path& source) {
  const auto data = detail::slurp(source);
  const std::string_view text(reinterpret_cast<const char*>(data.data()), data.size());
  EventFile ev;
  std::size_t pos = 0;
  bool have_duration = false;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_start = pos;
    pos = eol + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view key = "# duration_ps=";
      if (line.substr(0, key.size()) == key) {
        const auto num = line.substr(key.size());
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), ev.duration_ps);
        if (ec != std::errc() || p != num.data() + num.size()) throw ParseError("bad duration comment", line_start);
        have_duration = true;
      }
      continue;
    }
    if (!have_header) {
      if (line != "t_ps,kind") throw ParseError("expected header 't_ps,kind'", line_start);
      have_header = true;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) throw ParseError("missing ',' in event row", line_start);
    std::uint64_t t = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + comma, t);
    if (ec != std::errc() || p != line.data() + comma) throw ParseError("bad timestamp", line_start);
    const auto kind = line.substr(comma + 1);
    if (kind != "0" && kind != "1") throw ParseError("kind must be 0 or 1", line_start + comma + 1);
    if (!ev.events.empty() && t < ev.events.back().t_ps) throw ParseError("events not sorted by time", line_start);
    ev.events.push_back({kind == "0" ? PairKind::zero_pair : PairKind::one_pair, t});
  }
  if (!have_header) throw ParseError("missing 't_ps,kind' header", 0);
  if (!have_duration) throw ParseError("missing '# duration_ps=' comment", 0);
  return ev;
}

void write_histogram_csv(const CorrelationHistogram& h, const std::filesystem::path& destination) {
  std::ostringstream os;
  os << "offset_ps,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) os << h.edge(i) << ',' << h.counts[i] << '\n';
  write_text(destination, os.str());
}

}  // namespace qrng
