#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace dsgd {

// Counter-based generator: draw k of stream (seed, stream) is a pure function
// of (seed, stream, k), so every (client, round) pair can own an independent
// stream regardless of scheduling. Satisfies UniformRandomBitGenerator so the
// <random> distributions can consume it.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  SeededRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  // Child stream keyed by this generator's (seed, stream) and `tag`; does not
  // advance this generator.
  [[nodiscard]] SeededRng derive(std::uint64_t tag) const noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

// Order-sensitive hash of a list of tags into a stream id.
std::uint64_t stream_id(std::initializer_list<std::uint64_t> tags) noexcept;

}  // namespace dsgd
