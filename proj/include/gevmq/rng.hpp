#pragma once

#include <cstdint>
#include <random>

namespace gevmq {

// SplitMix64 finalizer. It is a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for replicate `rep` of grid cell `cell`. For a fixed master seed,
// distinct (cell, rep) pairs with cell < 2^24 and rep < 2^40 give distinct seeds.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t rep);

// Uniform source on top of mt19937_64. Integer and real draws are derived by
// hand so that streams do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on the open interval (0, 1).
  double uniform();
  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace gevmq
