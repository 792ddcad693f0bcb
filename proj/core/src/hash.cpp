#include "qrng/hash.hpp"

#include <array>
#include <memory>

#include <openssl/evp.h>

#include "binary_io.hpp"
#include "qrng/error.hpp"

namespace qrng {

namespace {

struct MdCtxFree {
  void operator()(EVP_MD_CTX* c) const noexcept { EVP_MD_CTX_free(c); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxFree>;

MdCtx start() {
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  return ctx;
}

void update(EVP_MD_CTX* ctx, const void* data, std::size_t len) {
  if (EVP_DigestUpdate(ctx, data, len) != 1) throw Error("sha256: update failed");
}

std::string finish(EVP_MD_CTX* ctx) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, md.data(), &len) != 1) throw Error("sha256: final failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> data) {
  auto ctx = start();
  update(ctx.get(), data.data(), data.size());
  return finish(ctx.get());
}

std::string sha256_hex(std::string_view text) {
  auto ctx = start();
  update(ctx.get(), text.data(), text.size());
  return finish(ctx.get());
}

std::string sha256_file(const std::filesystem::path& path) {
  auto f = detail::open_file(path, "rb");
  auto ctx = start();
  std::array<std::uint8_t, 1 << 16> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), f.get())) > 0) update(ctx.get(), buf.data(), got);
  if (std::ferror(f.get())) throw IoError("read failure on '" + path.string() + "'");
  return finish(ctx.get());
}

}  // namespace qrng
