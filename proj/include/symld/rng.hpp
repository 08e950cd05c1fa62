#pragma once

#include <cstdint>

namespace symld {

// Counter-based splittable generator. A draw is a pure function of
// (seed, stream, counter), so identical (seed, stream) handles reproduce
// identical sequences regardless of what other handles do in between.
// Distinct streams are independent for all practical purposes.
//
// A handle must not be shared across concurrent tasks; split() child
// streams instead.
class RngHandle {
 public:
  explicit RngHandle(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double next_unit();

  // Uniform on {0,...,bound-1} by 128-bit fixed-point multiply. No modulo
  // bias; the residual nonuniformity is < bound/2^64 per value.
  std::uint64_t next_below(std::uint64_t bound);

  // Standard normal via Box-Muller. Consumes exactly two words per call.
  double next_normal();

  // Independent child stream; deterministic in (this handle's identity, tag).
  RngHandle split(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace symld
