#pragma once

#include <cstdint>
#include <random>

namespace fequiv {

// The library's only random source: std::mt19937_64 with uniform and normal
// variates derived from its raw 64-bit output, so streams are identical on
// every standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller; one variate per call, the sine branch is discarded.
  double normal(double mean, double stddev);

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; derives independent child seeds from (seed, index).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace fequiv
