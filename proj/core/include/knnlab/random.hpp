#pragma once

#include <array>
#include <cstdint>

namespace knnlab {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
/// Maps a 128-bit counter and 64-bit key to 128 pseudo-random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Deterministic random stream keyed by (seed, stream id). The n-th value of
/// a stream depends only on (seed, stream, n), so independent trials can be
/// generated in any order or on any thread.
class CounterStream {
public:
  CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept;
  /// Standard normal variate (Box-Muller; pairs are cached).
  double normal() noexcept;

  std::uint64_t blocks_consumed() const noexcept { return block_; }

private:
  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer, used to derive child seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace knnlab
