// Counter-based random streams (Philox4x32-10).
//
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.
// A stream is identified by a 64-bit key (seed) and a 64-bit stream id
// (replica index); the counter addresses blocks within the stream, so
// replica r of seed s yields the same numbers regardless of which worker
// draws it or in which order replicas are scheduled.
#pragma once

#include <array>
#include <cstdint>

namespace conegreen {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32 bijection with 10 rounds.
PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key) noexcept;

/// SplitMix64 finaliser, used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// Value-semantic stream state. Copying a stream copies its position.
class RandomStream {
 public:
  RandomStream() = default;
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  std::uint64_t blocks_used() const noexcept { return block_; }

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  void refill() noexcept;

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  PhiloxBlock buffer_{};
  int used_ = 4;
};

}  // namespace conegreen
