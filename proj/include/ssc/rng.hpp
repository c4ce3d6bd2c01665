#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string_view>

namespace ssc {

// SplitMix64 finaliser; used for key derivation only.
std::uint64_t mix64(std::uint64_t x);

// xoshiro256** engine. Satisfies UniformRandomBitGenerator so the <random>
// distributions can sit on top of it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  // Counter-based stream derivation: the same (master, keys...) always gives
  // the same stream, independent of how many other streams were drawn.
  static Rng stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys);
  static Rng stream(std::uint64_t master, std::span<const std::int64_t> path,
                    std::string_view purpose);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Child stream; consumes exactly one draw from this stream.
  Rng fork();

  double uniform();                        // open interval (0, 1)
  double exponential(double rate);         // mean 1/rate
  std::uint64_t below(std::uint64_t n);    // uniform on {0, ..., n-1}
  bool coin();

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace ssc
