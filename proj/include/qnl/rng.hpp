#pragma once
// Deterministic random numbers. xoshiro256++ seeded through splitmix64, plus
// Box-Muller gaussians. Every randomized routine in the library takes an Rng
// (or a seed) explicitly so runs are reproducible bit for bit on one platform.

#include <cstdint>
#include <cmath>

namespace qnl {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
    have_gauss_ = false;
    gauss_cache_ = 0.0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform over {0, ..., n-1} by rejection; unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t lim = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    std::uint64_t v;
    do { v = next_u64(); } while (v >= lim);
    return v % n;
  }

  double gauss() {
    if (have_gauss_) { have_gauss_ = false; return gauss_cache_; }
    double u1;
    do { u1 = uniform(); } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    gauss_cache_ = r * std::sin(a);
    have_gauss_ = true;
    return r * std::cos(a);
  }

  // Independent substream; fork(k) for trial k keeps trials order-free.
  Rng fork(std::uint64_t stream) const {
    std::uint64_t h = s_[0] ^ rotl(s_[2], 19) ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return Rng(splitmix64(h));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  bool have_gauss_;
  double gauss_cache_;
};

}  // namespace qnl
