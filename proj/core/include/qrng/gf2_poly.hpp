#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qrng {

enum class ClmulBackend : std::uint8_t { automatic, hardware, software };

/// True when the CPU supports PCLMULQDQ.
bool clmul_hardware_available() noexcept;

/// Product of two polynomials over GF(2). Coefficient i lives in bit i%64 of
/// word i/64. The result has a.size() + b.size() words. Karatsuba on top of a
/// carry-less schoolbook base case; `hardware` throws ValidationError when the
/// CPU lacks PCLMULQDQ.
std::vector<std::uint64_t> gf2_multiply(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                        ClmulBackend backend = ClmulBackend::automatic);

}  // namespace qrng
