#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "qrng/bit_buffer.hpp"
#include "qrng/coincidence.hpp"

namespace qrng {

struct RawBitRecord {
  BitBuffer bits;
  std::uint64_t zero_pairs = 0;
  std::uint64_t one_pairs = 0;
  double duration_s = 0.0;
  std::string source;  // free-form provenance, e.g. the input file name

  double bit_rate_hz() const noexcept {
    return duration_s > 0.0 ? static_cast<double>(bits.size()) / duration_s : 0.0;
  }
};

/// ZeroPair -> 0, OnePair -> 1, in event order. Throws ValidationError if the
/// events are not sorted by time.
RawBitRecord generate_raw_bits(std::span<const CoincidenceEvent> events, double duration_s, std::string source = {});

/// Fraction of ones; throws ValidationError on an empty record.
double bias(const RawBitRecord& record);

}  // namespace qrng
