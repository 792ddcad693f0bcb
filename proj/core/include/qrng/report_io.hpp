#pragma once

// JSON renderings of the analysis reports and the CSV side formats.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/bitgen.hpp"
#include "qrng/coincidence.hpp"
#include "qrng/entropy.hpp"
#include "qrng/nist.hpp"
#include "qrng/stats.hpp"

namespace qrng {

nlohmann::json to_json(const EntropyReport& report, std::optional<double> ratio = std::nullopt);
nlohmann::json to_json(const RawBitRecord& record);  // sidecar without the bits
nlohmann::json to_json(const TestReport& report);
nlohmann::json to_json(const AutocorrReport& report);
nlohmann::json to_json(const HeraldedG2& g2);
nlohmann::json to_json(const HeraldingEfficiency& eff);
nlohmann::json to_json(const G2WindowScan& scan);
nlohmann::json to_json(const LinearFit& fit);

/// Human-readable NIST table, one row per test.
std::string format_table(const TestReport& report);

struct EventFile {
  std::vector<CoincidenceEvent> events;
  std::uint64_t duration_ps = 0;
};

/// "# duration_ps=<n>" then a "t_ps,kind" header and one row per event,
/// kind 0 for ZeroPair and 1 for OnePair.
void write_events_csv(std::span<const CoincidenceEvent> events, std::uint64_t duration_ps,
                      const std::filesystem::path& destination);
EventFile read_events_csv(const std::filesystem::path& source);

/// "offset_ps,count" rows, offset being the left bin edge.
void write_histogram_csv(const CorrelationHistogram& h, const std::filesystem::path& destination);

/// Writes `text` verbatim.
void write_text(const std::filesystem::path& destination, std::string_view text);

}  // namespace qrng
