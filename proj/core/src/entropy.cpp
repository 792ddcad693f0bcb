#include "qrng/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "qrng/error.hpp"

namespace qrng {

EntropyReport entropy_from_counts(const std::array<std::uint64_t, 256>& counts, EntropyEstimate estimate) {
  EntropyReport r;
  r.counts = counts;
  r.estimate = estimate;
  std::uint64_t top = 0;
  for (auto c : counts) {
    r.n_blocks += c;
    top = std::max(top, c);
  }
  if (r.n_blocks == 0) throw ValidationError("min-entropy: no complete 8-bit block");
  const double n = static_cast<double>(r.n_blocks);
  double p = static_cast<double>(top) / n;
  if (estimate == EntropyEstimate::conservative) p = std::min(1.0, p + 3.0 * std::sqrt(p * (1.0 - p) / n));
  r.p_max = p;
  // -log2(1) is -0.0; keep the sign tidy for the constant-stream case.
  r.h_inf_block = p >= 1.0 ? 0.0 : -std::log2(p);
  r.h_inf_per_bit = r.h_inf_block / 8.0;
  return r;
}

EntropyReport min_entropy_8bit(const BitBuffer& bits, EntropyEstimate estimate) {
  if (bits.size() < 8) throw ValidationError("min_entropy_8bit: need at least 8 bits");
  const std::size_t n_blocks = bits.size() / 8;
  std::array<std::uint64_t, 256> counts{};
  const auto words = bits.words();
  // Word w holds blocks 8w..8w+7; within a block the first bit is the MSB, so
  // each byte of the LSB-first word is bit-reversed.
  static constexpr auto reverse = [] {
    std::array<std::uint8_t, 256> t{};
    for (int v = 0; v < 256; ++v) {
      int r = 0;
      for (int b = 0; b < 8; ++b)
        if (v & (1 << b)) r |= 1 << (7 - b);
      t[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(r);
    }
    return t;
  }();
  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    const auto byte = static_cast<std::uint8_t>(words[blk >> 3] >> (8 * (blk & 7)));
    ++counts[reverse[byte]];
  }
  return entropy_from_counts(counts, estimate);
}

double extraction_ratio(const EntropyReport& report, const ExtractionPolicy& policy) {
  if (!(policy.cap > 0.0 && policy.cap <= 1.0)) throw ValidationError("extraction_ratio: cap must lie in (0,1]");
  if (!(policy.safety_margin >= 0.0)) throw ValidationError("extraction_ratio: safety margin must be >= 0");
  if (report.h_inf_per_bit <= policy.safety_margin)
    throw InsufficientEntropy("extraction_ratio: per-bit min-entropy " + std::to_string(report.h_inf_per_bit) +
                              " does not exceed the safety margin " + std::to_string(policy.safety_margin));
  return std::min(report.h_inf_per_bit - policy.safety_margin, policy.cap);
}

}  // namespace qrng
