#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace therasim {

// Seeded random source with portable draws.
//
// std::mt19937_64 output is fully specified by the standard, but the
// distributions in <random> are not, so every derived draw is computed here.
// This keeps traces byte-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be > 0. Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t draw = next();
    while (draw >= limit) draw = next();
    return draw % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Independent child stream; advances this stream by one draw.
  Rng split() { return Rng(next() ^ 0x9E3779B97F4A7C15ULL); }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace therasim
