#pragma once

// Little-endian helpers and RAII file access shared by the file formats.

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qrng/error.hpp"

namespace qrng::detail {

inline void put_u64_le(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline std::uint64_t get_u64_le(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[i];
  return v;
}

inline void put_u16_le(std::uint8_t* out, std::uint16_t v) {
  out[0] = static_cast<std::uint8_t>(v);
  out[1] = static_cast<std::uint8_t>(v >> 8);
}

inline std::uint16_t get_u16_le(const std::uint8_t* in) {
  return static_cast<std::uint16_t>(in[0] | (in[1] << 8));
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "' (mode " + mode + ")");
  return f;
}

inline void write_all(std::FILE* f, std::span<const std::uint8_t> data, const std::filesystem::path& path) {
  if (!data.empty() && std::fwrite(data.data(), 1, data.size(), f) != data.size())
    throw IoError("short write to '" + path.string() + "'");
}

/// Reads the whole file into memory.
inline std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  auto f = open_file(path, "rb");
  std::vector<std::uint8_t> data;
  std::array<std::uint8_t, 1 << 16> chunk{};
  std::size_t got = 0;
  while ((got = std::fread(chunk.data(), 1, chunk.size(), f.get())) > 0)
    data.insert(data.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(got));
  if (std::ferror(f.get())) throw IoError("read failure on '" + path.string() + "'");
  return data;
}

/// Bit-reversal of a byte; converts between MSB-first bytes and LSB-first words.
inline constexpr std::array<std::uint8_t, 256> kReverseByte = [] {
  std::array<std::uint8_t, 256> t{};
  for (int v = 0; v < 256; ++v) {
    std::uint8_t r = 0;
    for (int b = 0; b < 8; ++b)
      if (v & (1 << b)) r |= static_cast<std::uint8_t>(1 << (7 - b));
    t[static_cast<std::size_t>(v)] = r;
  }
  return t;
}();

}  // namespace qrng::detail
