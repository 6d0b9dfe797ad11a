#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sieve {

// Counter-based generator: the n-th draw is splitmix64(key + n * gamma), so a
// stream is fully identified by its key and never depends on how many draws
// other streams made. Satisfies UniformRandomBitGenerator.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  std::uint64_t key() const { return key_; }
  std::uint64_t draws() const { return counter_; }

  // Uniform double in [0, 1).
  double uniform();

 private:
  std::uint64_t key_;
  std::uint64_t counter_{0};
};

std::uint64_t mix64(std::uint64_t x);

// Derives a stream key from a root seed and a path of coordinates, e.g.
// (seed, replicate, sample, iteration, step).
std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

inline StreamRng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return StreamRng(stream_key(seed, path));
}

}  // namespace sieve
