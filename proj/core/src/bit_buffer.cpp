#include "qrng/bit_buffer.hpp"

#include <bit>
#include <cstring>

#include "binary_io.hpp"
#include "qrng/error.hpp"

namespace qrng {

namespace {

constexpr std::array<std::uint8_t, 4> kPackedMagic = {'Q', 'B', 'B', '1'};
constexpr std::size_t kPackedHeader = 12;

std::size_t word_count(std::size_t bits) { return (bits + 63) / 64; }

}  // namespace

BitBuffer::BitBuffer(std::size_t bit_len) : words_(word_count(bit_len), 0), bit_len_(bit_len) {}

BitBuffer BitBuffer::from_string(std::string_view bits) {
  BitBuffer out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const char c = bits[i];
    if (c == '1')
      out.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    else if (c != '0')
      throw ParseError(std::string("invalid bit character '") + c + "'", i);
  }
  return out;
}

BitBuffer BitBuffer::from_words(std::vector<std::uint64_t> words, std::size_t bit_len) {
  if (words.size() < word_count(bit_len)) throw ValidationError("BitBuffer::from_words: too few words for bit_len");
  words.resize(word_count(bit_len));
  BitBuffer out;
  out.words_ = std::move(words);
  out.bit_len_ = bit_len;
  out.clear_tail();
  return out;
}

BitBuffer BitBuffer::from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_len) {
  if (bytes.size() < (bit_len + 7) / 8) throw ValidationError("BitBuffer::from_bytes: too few bytes for bit_len");
  BitBuffer out(bit_len);
  const std::size_t nbytes = (bit_len + 7) / 8;
  for (std::size_t i = 0; i < nbytes; ++i)
    out.words_[i >> 3] |= std::uint64_t{detail::kReverseByte[bytes[i]]} << (8 * (i & 7));
  out.clear_tail();
  return out;
}

bool BitBuffer::at(std::size_t i) const {
  if (i >= bit_len_) throw ValidationError("BitBuffer::at: index out of range");
  return (*this)[i];
}

void BitBuffer::set(std::size_t i, bool value) {
  if (i >= bit_len_) throw ValidationError("BitBuffer::set: index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (i & 63);
  if (value)
    words_[i >> 6] |= mask;
  else
    words_[i >> 6] &= ~mask;
}

void BitBuffer::push_back(bool value) {
  if ((bit_len_ & 63) == 0) words_.push_back(0);
  if (value) words_[bit_len_ >> 6] |= std::uint64_t{1} << (bit_len_ & 63);
  ++bit_len_;
}

void BitBuffer::resize(std::size_t bits) {
  words_.resize(word_count(bits), 0);
  bit_len_ = bits;
  clear_tail();
}

void BitBuffer::append(const BitBuffer& other) {
  if (other.empty()) return;
  const std::size_t shift = bit_len_ & 63;
  const std::size_t old_len = bit_len_;
  if (shift == 0) {
    words_.insert(words_.end(), other.words_.begin(), other.words_.end());
  } else {
    words_.resize(word_count(old_len + other.bit_len_), 0);
    std::size_t w = old_len >> 6;
    for (std::uint64_t src : other.words_) {
      words_[w] |= src << shift;
      if (w + 1 < words_.size()) words_[w + 1] |= src >> (64 - shift);
      ++w;
    }
  }
  bit_len_ = old_len + other.bit_len_;
  words_.resize(word_count(bit_len_));
  clear_tail();
}

std::uint64_t BitBuffer::word_at(std::size_t pos) const noexcept {
  if (pos >= bit_len_) return 0;
  const std::size_t w = pos >> 6;
  const std::size_t shift = pos & 63;
  std::uint64_t v = words_[w] >> shift;
  if (shift != 0 && w + 1 < words_.size()) v |= words_[w + 1] << (64 - shift);
  return v;
}

BitBuffer BitBuffer::slice(std::size_t start, std::size_t len) const {
  if (start > bit_len_ || len > bit_len_ - start) throw ValidationError("BitBuffer::slice: range out of bounds");
  BitBuffer out(len);
  for (std::size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = word_at(start + 64 * w);
  out.clear_tail();
  return out;
}

std::size_t BitBuffer::count_ones() const noexcept {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::uint8_t> BitBuffer::to_bytes() const {
  std::vector<std::uint8_t> out((bit_len_ + 7) / 8);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = detail::kReverseByte[static_cast<std::uint8_t>(words_[i >> 3] >> (8 * (i & 7)))];
  return out;
}

std::string BitBuffer::to_string() const {
  std::string s(bit_len_, '0');
  for (std::size_t i = 0; i < bit_len_; ++i)
    if ((*this)[i]) s[i] = '1';
  return s;
}

BitBuffer& BitBuffer::operator^=(const BitBuffer& other) {
  if (other.bit_len_ != bit_len_) throw ValidationError("BitBuffer xor: length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

BitBuffer operator^(BitBuffer lhs, const BitBuffer& rhs) {
  lhs ^= rhs;
  return lhs;
}

void BitBuffer::clear_tail() noexcept {
  const std::size_t rem = bit_len_ & 63;
  if (rem != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << rem) - 1;
}

void write_bits(const BitBuffer& bits, const std::filesystem::path& destination, BitFormat format) {
  auto f = detail::open_file(destination, "wb");
  if (format == BitFormat::ascii) {
    const std::string s = bits.to_string();
    detail::write_all(f.get(), {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}, destination);
  } else {
    std::array<std::uint8_t, kPackedHeader> header{};
    std::memcpy(header.data(), kPackedMagic.data(), 4);
    detail::put_u64_le(header.data() + 4, bits.size());
    detail::write_all(f.get(), header, destination);
    detail::write_all(f.get(), bits.to_bytes(), destination);
  }
  if (std::fflush(f.get()) != 0) throw IoError("flush failed on '" + destination.string() + "'");
}

BitBuffer read_bits(const std::filesystem::path& source, BitFormat format) {
  const std::vector<std::uint8_t> data = detail::slurp(source);
  if (format == BitFormat::ascii) {
    std::size_t n = data.size();
    // One trailing line ending is tolerated.
    if (n > 0 && data[n - 1] == '\n') --n;
    if (n > 0 && data[n - 1] == '\r') --n;
    return BitBuffer::from_string({reinterpret_cast<const char*>(data.data()), n});
  }
  if (data.size() < kPackedHeader) throw ParseError("packed bit file shorter than its header", data.size());
  if (std::memcmp(data.data(), kPackedMagic.data(), 4) != 0) throw ParseError("bad magic, expected QBB1", 0);
  const std::uint64_t bit_len = detail::get_u64_le(data.data() + 4);
  const std::uint64_t need = (bit_len + 7) / 8;
  if (data.size() - kPackedHeader < need) throw ParseError("truncated payload", data.size());
  if (data.size() - kPackedHeader > need) throw ParseError("trailing bytes after payload", kPackedHeader + need);
  if (bit_len % 8 != 0 && need > 0) {
    const std::uint8_t last = data[kPackedHeader + need - 1];
    const auto pad_mask = static_cast<std::uint8_t>(0xFFU >> (bit_len % 8));
    if ((last & pad_mask) != 0) throw ParseError("nonzero padding bits in final byte", kPackedHeader + need - 1);
  }
  return BitBuffer::from_bytes({data.data() + kPackedHeader, need}, bit_len);
}

BitFormat detect_bit_format(const std::filesystem::path& source) {
  auto f = detail::open_file(source, "rb");
  std::array<std::uint8_t, 4> head{};
  const std::size_t got = std::fread(head.data(), 1, head.size(), f.get());
  return (got == 4 && head == kPackedMagic) ? BitFormat::packed : BitFormat::ascii;
}

}  // namespace qrng
