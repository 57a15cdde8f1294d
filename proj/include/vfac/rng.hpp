#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace vfac {

// ChaCha20 keystream generator. Seeded instances are fully deterministic,
// which is what tests and scenario replays rely on; from_os() draws the key
// from the operating system.
class Rng {
 public:
  static Rng from_seed(std::uint64_t seed);
  static Rng from_os();

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  // Uniform in [0, bound), bound > 0.
  std::uint64_t uniform(std::uint64_t bound);

  // Independent child stream, e.g. one per simulated principal.
  Rng fork();

 private:
  explicit Rng(const std::array<std::uint8_t, 32>& key);

  void refill();

  std::array<std::uint8_t, 32> key_;
  std::uint64_t block_ = 0;
  std::array<std::uint8_t, 64> buf_{};
  std::size_t used_ = 64;
};

}  // namespace vfac
