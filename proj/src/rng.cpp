#include "gevmq/rng.hpp"

namespace gevmq {

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t rep) {
  const std::uint64_t key = mix64(master ^ 0x6a09e667f3bcc909ULL);
  const std::uint64_t word = ((cell & 0xffffffULL) << 40) | (rep & 0xffffffffffULL);
  return mix64(word ^ key);
}

double Rng::uniform() {
  // 53 random bits shifted by half an ulp; never 0 or 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace gevmq
