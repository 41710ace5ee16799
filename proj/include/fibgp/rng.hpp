#pragma once

#include <cstdint>

namespace fibgp {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// xoshiro256** seeded via splitmix64.  One explicit stream per experiment;
// no global state, so seeded runs replay exactly.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x = splitmix64(x);
      word = x == 0 ? 0x6A09E667F3BCC908ULL : x;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, n).  Modulo bias is below 2^-32 for the ranges used here.
  std::size_t below(std::size_t n) { return next_u64() % n; }

  std::int32_t next_i32() { return static_cast<std::int32_t>(next_u64()); }

  double unit() { return (next_u64() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

// Counter-based draw: one fresh signed 32-bit value per (seed, site, case),
// independent of evaluation order, so parallel runs replay exactly.
inline std::int32_t counter_draw_i32(std::uint64_t seed, std::uint64_t site,
                                     std::uint64_t test_case) {
  std::uint64_t h = splitmix64(seed ^ (site * 0xD1342543DE82EF95ULL));
  h = splitmix64(h ^ (test_case * 0x9E3779B97F4A7C15ULL));
  return static_cast<std::int32_t>(h);
}

}  // namespace fibgp
