#pragma once

#include <cstdint>
#include <random>

namespace breaklab {

/// Uniform doubles in [0,1) from the top 53 bits of mt19937_64; the sequence
/// depends only on the seed, not on the standard library's distributions.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace breaklab
