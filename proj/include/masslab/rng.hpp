// Counter-based random numbers (Philox4x32-10). Every draw is a pure function of
// (seed, counter), so results do not depend on how work is split across threads.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace masslab {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * counter[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * counter[2];
      counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return counter;
  }
};

/// Stream tags keep unrelated uses of one seed apart.
enum class StreamTag : std::uint32_t {
  kCoefficient = 0,
  kPoint = 1,
  kGenerator = 2,
};

/// Draws from the counter (index, slot, tag) under seed.
inline Philox4x32::Block philox_block(std::uint64_t seed, std::uint64_t index, std::uint32_t slot, StreamTag tag) {
  const Philox4x32::Block counter{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), slot,
                                  static_cast<std::uint32_t>(tag)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Philox4x32::generate(counter, key);
}

/// Uniform on (0, 1] with 53 random bits.
inline double open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// Standard complex Gaussian: real and imaginary parts independent N(0, 1/2).
inline std::complex<double> complex_gaussian(std::uint64_t seed, std::uint64_t index, std::uint32_t slot,
                                             StreamTag tag = StreamTag::kCoefficient) {
  const auto b = philox_block(seed, index, slot, tag);
  const double radius = std::sqrt(-std::log(open_unit(b[0], b[1])));
  const double angle = 2.0 * std::numbers::pi * open_unit(b[2], b[3]);
  return std::polar(radius, angle);
}

/// Two independent uniforms on (0, 1].
inline std::array<double, 2> uniform_pair(std::uint64_t seed, std::uint64_t index, std::uint32_t slot,
                                          StreamTag tag) {
  const auto b = philox_block(seed, index, slot, tag);
  return {open_unit(b[0], b[1]), open_unit(b[2], b[3])};
}

/// Derives an independent seed for a sub-experiment (SplitMix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace masslab
