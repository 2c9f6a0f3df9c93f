#pragma once

#include <cmath>
#include <cstdint>

namespace startext {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based generator: the stream is a pure function of the key, so
// sample i of run (seed, index) is identical regardless of call order or
// thread schedule. Keys are mixed through splitmix64.
class CounterRng {
 public:
  CounterRng() : key_(0) {}
  explicit CounterRng(uint64_t seed) : key_(splitmix64(seed)) {}
  CounterRng(uint64_t seed, uint64_t index)
      : key_(splitmix64(splitmix64(seed) ^ (index * 0xd6e8feb86659fd93ULL))) {}

  // Independent substream, e.g. one per sampled quantity.
  CounterRng derive(uint64_t stream) const {
    CounterRng r;
    r.key_ = splitmix64(key_ ^ (stream * 0xa0761d6478bd642fULL));
    return r;
  }

  uint64_t next_u64() { return splitmix64(key_ ^ counter_++); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_int(uint64_t n) {
    // Rejection-free multiply-shift; bias is negligible for n << 2^64 and,
    // more importantly, identical on every platform.
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Standard normal via Box-Muller (deterministic two-draw form).
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace startext
