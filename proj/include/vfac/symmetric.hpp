#pragma once

#include <optional>

#include "vfac/bytes.hpp"

namespace vfac {

class Rng;

// Symmetric layer SE: XChaCha20-Poly1305 with a 256-bit key. The random
// 24-byte nonce is stored in front of the ciphertext.
namespace se {

inline constexpr std::size_t kKeyBytes = 32;
inline constexpr std::size_t kNonceBytes = 24;
inline constexpr std::size_t kTagBytes = 16;

Bytes encrypt(ByteView key, ByteView plaintext, Rng& rng, ByteView aad = {});
// nullopt on any authentication failure or malformed input.
std::optional<Bytes> decrypt(ByteView key, ByteView ciphertext, ByteView aad = {});

}  // namespace se

void ensure_sodium();

}  // namespace vfac
