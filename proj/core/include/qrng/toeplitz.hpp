#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qrng/bit_buffer.hpp"

namespace qrng {

struct ExtractorConfig {
  std::size_t block_bits = 1'000'000;  // n
  double ratio = 0.95;
  std::uint64_t seed_key = 0;

  /// m = floor(ratio·n), with a 1e-9 guard so 0.95·100 gives 95.
  std::size_t output_bits() const noexcept;
  std::size_t seed_bits() const noexcept { return output_bits() + block_bits - 1; }

  /// Requires 0 < m < n.
  void validate() const;
};

struct ToeplitzSeed {
  BitBuffer s;  // s[0 .. m+n-2]
};

/// Raw ChaCha20 keystream (RFC 8439 block layout, 32-bit block counter).
std::vector<std::uint8_t> chacha20_keystream(const std::array<std::uint8_t, 32>& key,
                                             const std::array<std::uint8_t, 12>& nonce, std::uint32_t counter,
                                             std::size_t n_bytes);

/// Seed for block `block_index`: ChaCha20 keystream under the key
/// LE64(seed_key) ‖ LE64(block_index) ‖ 16 zero bytes, zero nonce, counter 0.
/// Keystream bytes are read MSB-first into bits. Throws on length 0.
ToeplitzSeed expand_seed(std::uint64_t seed_key, std::uint64_t block_index, std::size_t length);

/// out[i] = XOR_j s[i - j + n - 1]·x[j], i < m, j < n, as the middle slice of
/// the carry-less product s·x.
BitBuffer toeplitz_multiply(const ToeplitzSeed& seed, const BitBuffer& x, std::size_t m);

/// Word-packed shifted-XOR kernel; the slow reference the fast path is checked against.
BitBuffer toeplitz_multiply_reference(const ToeplitzSeed& seed, const BitBuffer& x, std::size_t m);

/// Hashes every complete n-bit block of `raw` with its own seed and
/// concatenates the outputs in block order; a trailing partial block is
/// dropped. Output is independent of `threads`.
BitBuffer extract(const BitBuffer& raw, const ExtractorConfig& config, unsigned threads = 1);

}  // namespace qrng
