#include "sieve/model/rng.hpp"

namespace sieve {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

StreamRng::result_type StreamRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double StreamRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed ^ 0x5bd1e995a3c1f00dULL);
  for (auto p : path) h = mix64(h ^ mix64(p + kGamma));
  return h;
}

}  // namespace sieve
