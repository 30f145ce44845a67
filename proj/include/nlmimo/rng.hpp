#pragma once

#include <array>
#include <cstdint>

#include "nlmimo/common.hpp"

namespace nlmimo {

/// Philox4x32-10 block function (Salmon et al., Random123).
/// Maps a 128-bit counter and 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to derive stream identifiers from tuples.
std::uint64_t mix64(std::uint64_t x);

inline std::uint64_t stream_id(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return mix64(mix64(mix64(a) ^ b) ^ c);
}

// Purpose tags so that different consumers of one seed never share streams.
namespace stream_tag {
inline constexpr std::uint64_t kBussgang = 0x42555353;
inline constexpr std::uint64_t kCovariance = 0x434f5652;
inline constexpr std::uint64_t kDrop = 0x44524f50;
inline constexpr std::uint64_t kPhase = 0x50484153;
inline constexpr std::uint64_t kBits = 0x42495453;
inline constexpr std::uint64_t kNoise = 0x4e4f4953;
inline constexpr std::uint64_t kAlpha = 0x414c5048;
inline constexpr std::uint64_t kGauss = 0x47415553;
}  // namespace stream_tag

/// Counter-based generator. The value at position i of stream s under key k is
/// a pure function of (k, s, i), so any partition of the index space across
/// workers reproduces the serial sequence exactly.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t start = 0)
      : seed_(seed), stream_(stream), counter_(start) {}

  /// 128 random bits of block `index`, independent of the running counter.
  std::array<std::uint32_t, 4> block(std::uint64_t index) const;

  std::array<std::uint32_t, 4> next_block() { return block(counter_++); }

  /// Uniform on (0, 1]; 53-bit resolution.
  double next_uniform();

  /// Circularly-symmetric complex Gaussian with E|z|^2 = 1 (variance 1/2 per
  /// real dimension). Consumes exactly one block.
  Complex next_complex_normal();

  /// Complex normal drawn at an explicit position; does not touch the counter.
  Complex complex_normal_at(std::uint64_t index) const;

  /// Standard real normal (one block, Box-Muller cosine branch).
  double next_normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
};

/// Box-Muller transform of two 64-bit words into a unit-power complex normal.
Complex complex_normal_from_bits(std::uint64_t w0, std::uint64_t w1);

/// Map 64 random bits to (0, 1].
inline double uniform_open_closed(std::uint64_t w) {
  return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace nlmimo
