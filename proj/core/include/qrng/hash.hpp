#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace qrng {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace qrng
