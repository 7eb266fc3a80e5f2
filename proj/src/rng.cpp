#include "tlmor/rng.hpp"

#include "tlmor/types.hpp"

#include <cmath>
#include <numbers>

namespace tlmor::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Counter philox4x32(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

NormalGenerator::NormalGenerator(std::uint64_t seed, Stream stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(static_cast<std::uint32_t>(stream)) {}

void NormalGenerator::fill(std::uint64_t path, std::uint64_t step, std::span<double> out) const {
  if (path > 0xFFFFFFFFull || step > 0xFFFFFFFFull) throw Error("NormalGenerator: path or step index out of range");
  // One Philox block gives two 52-bit uniforms, i.e. one Box-Muller pair.
  std::size_t o = 0;
  for (std::uint32_t b = 0; o < out.size(); ++b) {
    const Counter r = philox4x32({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(path), b, stream_}, key_);
    const double radius = std::sqrt(-2.0 * std::log(to_unit_open(r[0], r[1])));
    const double angle = 2.0 * std::numbers::pi * to_unit_open(r[2], r[3]);
    out[o++] = radius * std::cos(angle);
    if (o < out.size()) out[o++] = radius * std::sin(angle);
  }
}

}  // namespace tlmor::rng
