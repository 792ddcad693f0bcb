#include "qrng/toeplitz.hpp"

#include <cmath>
#include <memory>
#include <string>

#include <openssl/evp.h>

#include "binary_io.hpp"
#include "parallel.hpp"
#include "qrng/error.hpp"
#include "qrng/gf2_poly.hpp"

namespace qrng {

namespace {

void check_shapes(const ToeplitzSeed& seed, const BitBuffer& x, std::size_t m) {
  if (x.empty()) throw ValidationError("toeplitz_multiply: empty input");
  if (m == 0) throw ValidationError("toeplitz_multiply: m must be > 0");
  if (seed.s.size() != m + x.size() - 1)
    throw ValidationError("toeplitz_multiply: seed length " + std::to_string(seed.s.size()) + " != m + n - 1 = " +
                          std::to_string(m + x.size() - 1));
}

struct CipherCtxFree {
  void operator()(EVP_CIPHER_CTX* c) const noexcept { EVP_CIPHER_CTX_free(c); }
};

}  // namespace

std::size_t ExtractorConfig::output_bits() const noexcept {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(block_bits) + 1e-9));
}

void ExtractorConfig::validate() const {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ValidationError("ExtractorConfig: ratio must lie in (0,1]");
  const std::size_t m = output_bits();
  if (m == 0 || m >= block_bits)
    throw ValidationError("ExtractorConfig: need 0 < m < n (n = " + std::to_string(block_bits) +
                          ", m = " + std::to_string(m) + ")");
}

std::vector<std::uint8_t> chacha20_keystream(const std::array<std::uint8_t, 32>& key,
                                             const std::array<std::uint8_t, 12>& nonce, std::uint32_t counter,
                                             std::size_t n_bytes) {
  // OpenSSL takes a 16-byte IV: 32-bit little-endian counter then the nonce.
  std::array<std::uint8_t, 16> iv{};
  for (int i = 0; i < 4; ++i) iv[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(counter >> (8 * i));
  std::copy(nonce.begin(), nonce.end(), iv.begin() + 4);

  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree> ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_chacha20(), nullptr, key.data(), iv.data()) != 1)
    throw Error("chacha20: cipher initialisation failed");
  std::vector<std::uint8_t> zeros(n_bytes, 0);
  std::vector<std::uint8_t> out(n_bytes);
  std::size_t done = 0;
  while (done < n_bytes) {
    const int chunk = static_cast<int>(std::min<std::size_t>(n_bytes - done, 1 << 30));
    int len = 0;
    if (EVP_EncryptUpdate(ctx.get(), out.data() + done, &len, zeros.data() + done, chunk) != 1 || len != chunk)
      throw Error("chacha20: keystream generation failed");
    done += static_cast<std::size_t>(len);
  }
  return out;
}

ToeplitzSeed expand_seed(std::uint64_t seed_key, std::uint64_t block_index, std::size_t length) {
  if (length == 0) throw ValidationError("expand_seed: length must be >= 1");
  std::array<std::uint8_t, 32> key{};
  detail::put_u64_le(key.data(), seed_key);
  detail::put_u64_le(key.data() + 8, block_index);
  const auto bytes = chacha20_keystream(key, {}, 0, (length + 7) / 8);
  return {BitBuffer::from_bytes(bytes, length)};
}

BitBuffer toeplitz_multiply(const ToeplitzSeed& seed, const BitBuffer& x, std::size_t m) {
  check_shapes(seed, x, m);
  const std::size_t n = x.size();
  auto prod = gf2_multiply(seed.s.words(), x.words());
  const std::size_t total = prod.size() * 64;
  return BitBuffer::from_words(std::move(prod), total).slice(n - 1, m);
}

BitBuffer toeplitz_multiply_reference(const ToeplitzSeed& seed, const BitBuffer& x, std::size_t m) {
  check_shapes(seed, x, m);
  const std::size_t n = x.size();
  const std::size_t words = (m + 63) / 64;
  std::vector<std::uint64_t> out(words, 0);
  // Each set input bit j contributes the seed window s[n-1-j .. n-1-j+m).
  for (std::size_t j = 0; j < n; ++j) {
    if (!x[j]) continue;
    const std::size_t start = n - 1 - j;
    for (std::size_t w = 0; w < words; ++w) out[w] ^= seed.s.word_at(start + 64 * w);
  }
  return BitBuffer::from_words(std::move(out), m);
}

BitBuffer extract(const BitBuffer& raw, const ExtractorConfig& config, unsigned threads) {
  config.validate();
  const std::size_t n = config.block_bits;
  const std::size_t m = config.output_bits();
  if (raw.size() < n)
    throw ValidationError("extract: input has " + std::to_string(raw.size()) + " bits, less than one block of " +
                          std::to_string(n));
  const std::size_t blocks = raw.size() / n;
  std::vector<BitBuffer> outputs(blocks);
  detail::parallel_for(blocks, threads, [&](std::size_t k) {
    const ToeplitzSeed seed = expand_seed(config.seed_key, k, config.seed_bits());
    outputs[k] = toeplitz_multiply(seed, raw.slice(k * n, n), m);
  });
  BitBuffer out;
  out.reserve(blocks * m);
  for (const auto& o : outputs) out.append(o);
  return out;
}

}  // namespace qrng
