#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace kbandit {

// Counter-based generator: every draw is a pure function of (key, counter),
// so replicates are reproducible regardless of scheduling order.
namespace rng_detail {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace rng_detail

inline uint64_t mix_key(uint64_t a, uint64_t b) {
  return rng_detail::splitmix64(rng_detail::splitmix64(a) ^ (b * 0xd1342543de82ef95ull));
}

inline uint64_t hash_id(std::string_view s) {
  // FNV-1a
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Uniform in (0,1), 53-bit mantissa, never exactly 0 or 1.
inline double uniform01_at(uint64_t key, uint64_t counter) {
  const uint64_t u = rng_detail::splitmix64(key ^ (counter * 0x9e3779b97f4a7c15ull) ^ 0x5851f42d4c957f2dull);
  return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal as a pure function of (key, t); Box-Muller on two
// counter-indexed uniforms.
inline double gaussian_at(uint64_t key, uint64_t t) {
  const double u1 = uniform01_at(key, 2 * t);
  const double u2 = uniform01_at(key, 2 * t + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Stateful view over the counter stream, for consumers that draw a variable
// number of values (e.g. categorical sampling inside a master algorithm).
class CounterRng {
 public:
  explicit CounterRng(uint64_t key, uint64_t start = 0) : key_(key), counter_(start) {}

  double uniform01() { return uniform01_at(key_, counter_++); }

  double gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Index sampled from an unnormalized weight vector.
  template <class Vec>
  int categorical(const Vec& weights) {
    double total = 0.0;
    for (int i = 0; i < static_cast<int>(weights.size()); ++i) total += weights[i];
    double u = uniform01() * total;
    for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
      u -= weights[i];
      if (u <= 0.0) return i;
    }
    return static_cast<int>(weights.size()) - 1;
  }

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_;
};

}  // namespace kbandit
