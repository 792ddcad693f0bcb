#include "qrng/bitgen.hpp"

#include <string>

#include "qrng/error.hpp"

namespace qrng {

RawBitRecord generate_raw_bits(std::span<const CoincidenceEvent> events, double duration_s, std::string source) {
  if (duration_s < 0.0) throw ValidationError("generate_raw_bits: negative duration");
  RawBitRecord rec;
  rec.duration_s = duration_s;
  rec.source = std::move(source);

  std::vector<std::uint64_t> words((events.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0 && events[i].t_ps < events[i - 1].t_ps)
      throw ValidationError("generate_raw_bits: events not sorted at index " + std::to_string(i));
    if (events[i].kind == PairKind::one_pair) {
      words[i >> 6] |= std::uint64_t{1} << (i & 63);
      ++rec.one_pairs;
    } else {
      ++rec.zero_pairs;
    }
  }
  rec.bits = BitBuffer::from_words(std::move(words), events.size());
  return rec;
}

double bias(const RawBitRecord& record) {
  if (record.bits.empty()) throw ValidationError("bias: empty bit record");
  return static_cast<double>(record.bits.count_ones()) / static_cast<double>(record.bits.size());
}

}  // namespace qrng
