#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace monotest {

// Deterministic random stream (xoshiro256++ with splitmix64 seeding).
// Substreams derived from (seed, index) are independent of evaluation
// order and thread placement, which keeps every Monte Carlo result in
// this library reproducible for a fixed seed regardless of worker count.
class RngStream {
 public:
  static RngStream from_seed(std::uint64_t seed) {
    RngStream r;
    std::uint64_t x = seed;
    for (auto& word : r.state_) word = splitmix64(x);
    return r;
  }

  // Stream #index of the family identified by seed.
  static RngStream substream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed;
    std::uint64_t a = splitmix64(x);
    std::uint64_t mixed = a ^ (index + 0x9e3779b97f4a7c15ULL);
    mixed = splitmix64(mixed);
    RngStream r;
    std::uint64_t y = mixed ^ splitmix64(x);
    for (auto& word : r.state_) word = splitmix64(y);
    return r;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) by rejection (Lemire).
  std::uint64_t uniform_index(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal, Box-Muller; the spare deviate is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0,1]
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Standard exponential.
  double exponential() { return -std::log(1.0 - uniform01()); }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4] = {1, 2, 3, 4};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace monotest
