#include "vfac/symmetric.hpp"

#include <sodium.h>

#include <mutex>

#include "vfac/error.hpp"
#include "vfac/rng.hpp"

namespace vfac {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw Error(Errc::kInvalidInput, "libsodium initialisation failed");
  });
}

namespace se {

static_assert(kKeyBytes == crypto_aead_xchacha20poly1305_ietf_KEYBYTES);
static_assert(kNonceBytes == crypto_aead_xchacha20poly1305_ietf_NPUBBYTES);
static_assert(kTagBytes == crypto_aead_xchacha20poly1305_ietf_ABYTES);

Bytes encrypt(ByteView key, ByteView plaintext, Rng& rng, ByteView aad) {
  ensure_sodium();
  if (key.size() != kKeyBytes) throw Error(Errc::kInvalidInput, "SE key must be 32 bytes");
  Bytes out(kNonceBytes + plaintext.size() + kTagBytes);
  rng.fill(std::span(out.data(), kNonceBytes));
  unsigned long long clen = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + kNonceBytes, &clen, plaintext.data(),
                                             plaintext.size(), aad.data(), aad.size(), nullptr,
                                             out.data(), key.data());
  out.resize(kNonceBytes + clen);
  return out;
}

std::optional<Bytes> decrypt(ByteView key, ByteView ciphertext, ByteView aad) {
  ensure_sodium();
  if (key.size() != kKeyBytes || ciphertext.size() < kNonceBytes + kTagBytes) return std::nullopt;
  Bytes out(ciphertext.size() - kNonceBytes - kTagBytes);
  unsigned long long mlen = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(out.data(), &mlen, nullptr,
                                                 ciphertext.data() + kNonceBytes,
                                                 ciphertext.size() - kNonceBytes, aad.data(),
                                                 aad.size(), ciphertext.data(), key.data()) != 0) {
    return std::nullopt;
  }
  out.resize(mlen);
  return out;
}

}  // namespace se
}  // namespace vfac
