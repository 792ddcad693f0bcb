#include "qrng/gf2_poly.hpp"

#include <algorithm>
#include <array>

#include "qrng/error.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define QRNG_HAVE_X86 1
#endif

namespace qrng {

namespace {

using u64 = std::uint64_t;
using BaseMul = void (*)(const u64*, const u64*, std::size_t, u64*);

constexpr std::size_t kBaseWords = 16;

void clmul_soft(u64 a, u64 b, u64& lo, u64& hi) {
  using u128 = unsigned __int128;
  std::array<u128, 16> tab{};
  for (unsigned i = 1; i < 16; ++i)
    tab[i] = (i & 1) ? (tab[i ^ 1] ^ static_cast<u128>(a)) : (tab[i >> 1] << 1);
  u128 r = 0;
  for (int s = 60; s >= 0; s -= 4) r = (r << 4) ^ tab[(b >> s) & 15];
  lo = static_cast<u64>(r);
  hi = static_cast<u64>(r >> 64);
}

// out[0..2n) = a·b, product scanning: one output word per column.
void base_soft(const u64* a, const u64* b, std::size_t n, u64* out) {
  u64 carry = 0;
  for (std::size_t k = 0; k + 1 < 2 * n; ++k) {
    u64 lo_acc = carry;
    u64 hi_acc = 0;
    const std::size_t i0 = k < n ? 0 : k - n + 1;
    const std::size_t i1 = std::min(k, n - 1);
    for (std::size_t i = i0; i <= i1; ++i) {
      u64 lo = 0;
      u64 hi = 0;
      clmul_soft(a[i], b[k - i], lo, hi);
      lo_acc ^= lo;
      hi_acc ^= hi;
    }
    out[k] = lo_acc;
    carry = hi_acc;
  }
  out[2 * n - 1] = carry;
}

#ifdef QRNG_HAVE_X86
__attribute__((target("pclmul,sse4.1"))) void base_hw(const u64* a, const u64* b, std::size_t n, u64* out) {
  __m128i carry = _mm_setzero_si128();
  for (std::size_t k = 0; k + 1 < 2 * n; ++k) {
    __m128i acc = carry;
    const std::size_t i0 = k < n ? 0 : k - n + 1;
    const std::size_t i1 = std::min(k, n - 1);
    for (std::size_t i = i0; i <= i1; ++i) {
      const __m128i x = _mm_set_epi64x(static_cast<long long>(b[k - i]), static_cast<long long>(a[i]));
      acc = _mm_xor_si128(acc, _mm_clmulepi64_si128(x, x, 0x10));
    }
    out[k] = static_cast<u64>(_mm_cvtsi128_si64(acc));
    carry = _mm_srli_si128(acc, 8);
  }
  out[2 * n - 1] = static_cast<u64>(_mm_cvtsi128_si64(carry));
}
#endif

std::size_t scratch_words(std::size_t n) {
  std::size_t total = 0;
  while (n > kBaseWords) {
    const std::size_t k = n - n / 2;
    total += 4 * k;
    n = k;
  }
  return total;
}

// out[0..2n) = a·b for equal-length operands. `scratch` holds scratch_words(n).
void karatsuba(const u64* a, const u64* b, std::size_t n, u64* out, u64* scratch, BaseMul base) {
  if (n <= kBaseWords) {
    base(a, b, n, out);
    return;
  }
  const std::size_t h = n / 2;
  const std::size_t k = n - h;
  u64* as = scratch;
  u64* bs = as + k;
  u64* mid = bs + k;
  u64* rest = mid + 2 * k;

  karatsuba(a, b, h, out, rest, base);
  karatsuba(a + h, b + h, k, out + 2 * h, rest, base);

  std::copy(a + h, a + n, as);
  std::copy(b + h, b + n, bs);
  for (std::size_t i = 0; i < h; ++i) {
    as[i] ^= a[i];
    bs[i] ^= b[i];
  }
  karatsuba(as, bs, k, mid, rest, base);
  for (std::size_t i = 0; i < 2 * h; ++i) mid[i] ^= out[i];
  for (std::size_t i = 0; i < 2 * k; ++i) mid[i] ^= out[2 * h + i];
  for (std::size_t i = 0; i < 2 * k; ++i) out[h + i] ^= mid[i];
}

BaseMul select_base(ClmulBackend backend) {
  switch (backend) {
    case ClmulBackend::software: return base_soft;
    case ClmulBackend::hardware:
#ifdef QRNG_HAVE_X86
      if (clmul_hardware_available()) return base_hw;
#endif
      throw ValidationError("gf2_multiply: PCLMULQDQ not available on this CPU");
    case ClmulBackend::automatic: break;
  }
#ifdef QRNG_HAVE_X86
  if (clmul_hardware_available()) return base_hw;
#endif
  return base_soft;
}

}  // namespace

bool clmul_hardware_available() noexcept {
#ifdef QRNG_HAVE_X86
  static const bool has = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("pclmul") && __builtin_cpu_supports("sse4.1");
  }();
  return has;
#else
  return false;
#endif
}

std::vector<std::uint64_t> gf2_multiply(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                        ClmulBackend backend) {
  const BaseMul base = select_base(backend);
  std::vector<u64> out(a.size() + b.size(), 0);
  if (a.empty() || b.empty()) return out;
  if (a.size() < b.size()) std::swap(a, b);

  // Split the longer operand into chunks the size of the shorter one.
  const std::size_t len = b.size();
  std::vector<u64> chunk(len);
  std::vector<u64> prod(2 * len);
  std::vector<u64> scratch(scratch_words(len));
  for (std::size_t off = 0; off < a.size(); off += len) {
    const std::size_t take = std::min(len, a.size() - off);
    std::copy(a.begin() + static_cast<std::ptrdiff_t>(off), a.begin() + static_cast<std::ptrdiff_t>(off + take),
              chunk.begin());
    std::fill(chunk.begin() + static_cast<std::ptrdiff_t>(take), chunk.end(), 0);
    karatsuba(chunk.data(), b.data(), len, prod.data(), scratch.data(), base);
    const std::size_t span_words = std::min(2 * len, out.size() - off);
    for (std::size_t i = 0; i < span_words; ++i) out[off + i] ^= prod[i];
  }
  return out;
}

}  // namespace qrng
