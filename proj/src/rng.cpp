#include "vfac/rng.hpp"

#include <sodium.h>

#include "vfac/error.hpp"
#include "vfac/hash.hpp"
#include "vfac/symmetric.hpp"

namespace vfac {

Rng::Rng(const std::array<std::uint8_t, 32>& key) : key_(key) { ensure_sodium(); }

Rng Rng::from_seed(std::uint64_t seed) {
  std::array<std::uint8_t, 8> le{};
  for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  return Rng(tagged_digest("VFAC-V1-RNG", le));
}

Rng Rng::from_os() {
  ensure_sodium();
  std::array<std::uint8_t, 32> key;
  randombytes_buf(key.data(), key.size());
  return Rng(key);
}

void Rng::refill() {
  static constexpr std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> kNonce{};
  buf_.fill(0);
  crypto_stream_chacha20_xor_ic(buf_.data(), buf_.data(), buf_.size(), kNonce.data(), block_++,
                                key_.data());
  used_ = 0;
}

void Rng::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) {
    if (used_ == buf_.size()) refill();
    b = buf_[used_++];
  }
}

std::uint64_t Rng::next_u64() {
  std::array<std::uint8_t, 8> b;
  fill(b);
  std::uint64_t v = 0;
  for (auto x : b) v = v << 8 | x;
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw Error(Errc::kInvalidInput, "uniform bound must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

Rng Rng::fork() {
  std::array<std::uint8_t, 32> key;
  fill(key);
  return Rng(key);
}

}  // namespace vfac
