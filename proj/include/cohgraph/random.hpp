#pragma once

// Deterministic random helpers.
//
// Every random decision in the library draws from std::mt19937_64, whose
// output sequence is fixed by the C++ standard. The standard distributions
// are implementation-defined, so they are not used; the conversions below
// are the whole seed protocol:
//   uniform01()      = (next() >> 11) * 2^-53            in [0, 1)
//   below(n)         = next() % n                         in [0, n)
//   shuffle(v)       = Fisher-Yates from the back: for i = size-1 .. 1,
//                      swap(v[i], v[below(i + 1)])
//   normal()         = Box-Muller on two uniform01() draws (cosine branch)
//   derive(s, t)     = splitmix64 finalizer of s + golden * (t + 1)

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace cohgraph {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t below(std::uint64_t n) { return next() % n; }

  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // Seed for an independent stream keyed by (seed, salt), via one splitmix64 round.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cohgraph
