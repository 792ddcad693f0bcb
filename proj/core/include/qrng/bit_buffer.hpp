#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qrng {

/// Packed bit string with an exact length.
///
/// Bits are stored LSB-first inside 64-bit words (bit i lives in word i/64 at
/// position i%64) so GF(2) kernels can work on whole words. Every bit past
/// size() in the last word is kept at zero. On disk the same bits are written
/// MSB-first within each byte, see write_bits().
class BitBuffer {
 public:
  BitBuffer() = default;
  explicit BitBuffer(std::size_t bit_len);

  /// Parses a string of '0'/'1' characters. Throws ParseError naming the index
  /// of the first other character.
  static BitBuffer from_string(std::string_view bits);

  /// Takes ownership of `words`; bits past `bit_len` are cleared.
  static BitBuffer from_words(std::vector<std::uint64_t> words, std::size_t bit_len);

  /// Bytes hold bits MSB-first (bit 0 is 0x80 of byte 0).
  static BitBuffer from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_len);

  std::size_t size() const noexcept { return bit_len_; }
  bool empty() const noexcept { return bit_len_ == 0; }

  bool operator[](std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  bool at(std::size_t i) const;
  void set(std::size_t i, bool value);

  void push_back(bool value);
  void append(const BitBuffer& other);
  void reserve(std::size_t bits) { words_.reserve((bits + 63) / 64); }
  void resize(std::size_t bits);

  /// Copy of bits [start, start + len).
  BitBuffer slice(std::size_t start, std::size_t len) const;

  /// 64 bits starting at bit `pos` (bit `pos` in the LSB); zero past the end.
  std::uint64_t word_at(std::size_t pos) const noexcept;

  std::size_t count_ones() const noexcept;

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  /// Bytes in MSB-first order, ceil(size()/8) of them.
  std::vector<std::uint8_t> to_bytes() const;
  std::string to_string() const;

  /// Element-wise XOR; sizes must match.
  BitBuffer& operator^=(const BitBuffer& other);

  friend bool operator==(const BitBuffer&, const BitBuffer&) = default;

 private:
  void clear_tail() noexcept;

  std::vector<std::uint64_t> words_;
  std::size_t bit_len_ = 0;
};

BitBuffer operator^(BitBuffer lhs, const BitBuffer& rhs);

enum class BitFormat { packed, ascii };

/// Packed files are "QBB1" + bit_len (u64 LE) + MSB-first payload. ASCII files
/// carry one '0'/'1' per bit with no separators.
void write_bits(const BitBuffer& bits, const std::filesystem::path& destination, BitFormat format);
BitBuffer read_bits(const std::filesystem::path& source, BitFormat format);

/// Guesses the format from the leading magic bytes.
BitFormat detect_bit_format(const std::filesystem::path& source);

}  // namespace qrng
