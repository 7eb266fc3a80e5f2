#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace tlmor::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
Counter philox4x32(Counter ctr, Key key);

std::uint64_t splitmix64(std::uint64_t x);

/// Independent streams used by the library. The tag enters the counter, so
/// streams never overlap for a given seed.
enum class Stream : std::uint32_t {
  Simulation = 1,
  ReachabilityEstimator = 2,
  ObservabilityEstimator = 3,
  Test = 0xff,
};

/// Counter-based standard normal generator. Every (path, step) pair addresses
/// its own block of draws, which makes results independent of the order in
/// which paths are simulated.
class NormalGenerator {
 public:
  NormalGenerator(std::uint64_t seed, Stream stream);
  /// Fills `out` with N(0,1) draws for the given path and step.
  void fill(std::uint64_t path, std::uint64_t step, std::span<double> out) const;

 private:
  Key key_;
  std::uint32_t stream_;
};

/// Uniform in (0, 1) with 52 random bits; the half-step offset keeps both
/// endpoints out (with 53 bits the top value would round up to 1).
inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

}  // namespace tlmor::rng
