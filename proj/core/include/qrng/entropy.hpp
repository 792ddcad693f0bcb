#pragma once

#include <array>
#include <cstdint>

#include "qrng/bit_buffer.hpp"

namespace qrng {

enum class EntropyEstimate : std::uint8_t {
  plug_in,       // p_max = max(counts) / n_blocks
  conservative,  // p_max raised by three binomial standard deviations
};

struct EntropyReport {
  std::array<std::uint64_t, 256> counts{};  // block value -> occurrences, first bit of a block is the MSB
  std::uint64_t n_blocks = 0;
  double p_max = 0.0;
  double h_inf_block = 0.0;    // -log2(p_max)
  double h_inf_per_bit = 0.0;  // h_inf_block / 8
  EntropyEstimate estimate = EntropyEstimate::plug_in;
};

/// Min-entropy over consecutive non-overlapping 8-bit blocks; trailing bits
/// that do not fill a block are ignored. Throws ValidationError below 8 bits.
EntropyReport min_entropy_8bit(const BitBuffer& bits, EntropyEstimate estimate = EntropyEstimate::plug_in);

/// Builds the report from an existing histogram.
EntropyReport entropy_from_counts(const std::array<std::uint64_t, 256>& counts,
                                  EntropyEstimate estimate = EntropyEstimate::plug_in);

struct ExtractionPolicy {
  double safety_margin = 0.0;
  double cap = 0.95;
};

/// min(h_inf_per_bit - safety_margin, cap). Throws InsufficientEntropy when
/// h_inf_per_bit <= safety_margin.
double extraction_ratio(const EntropyReport& report, const ExtractionPolicy& policy = {});

}  // namespace qrng
