#include "symld/rng.hpp"

#include <cmath>

#include "symld/errors.hpp"

namespace symld {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Vigna / Steele-Lea-Flood).
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

RngHandle::RngHandle(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed + kGamma) ^ mix64(stream * kGamma + 1))) {}

std::uint64_t RngHandle::next_u64() { return mix64(key_ + (++counter_) * kGamma); }

double RngHandle::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngHandle::next_below(std::uint64_t bound) {
  if (bound == 0) throw DomainError("next_below: bound must be positive");
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

double RngHandle::next_normal() {
  // Box-Muller with a fixed word budget: consumption does not depend on the
  // values drawn, which keeps interleaved streams aligned.
  const std::uint64_t a = next_u64();
  const std::uint64_t b = next_u64();
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;          // [0,1)
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * M_PI * u2);
}

RngHandle RngHandle::split(std::uint64_t tag) const {
  return RngHandle(seed_, mix64(stream_ * kGamma + mix64(tag + kGamma)));
}

}  // namespace symld
