#pragma once

#include <cstdint>
#include <random>

namespace kgedmd {

/// SplitMix64 finalizer; decorrelates nearby integers.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Independent generator for stream `stream` of a seeded family. Streams are
/// addressed by index, so the draw sequence of stream k does not depend on how
/// many other streams exist or in which order they are consumed.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// Standard normal variate (Marsaglia polar method). Implemented here rather than
/// through std::normal_distribution so draws are identical across standard libraries.
class StandardNormal {
 public:
  double operator()(std::mt19937_64& rng);

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace kgedmd
