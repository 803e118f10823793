#pragma once

#include <cstdint>
#include <random>

namespace uqxai {

/// Seeded generator with platform-independent variates. mt19937_64 output is
/// fixed by the standard; the std:: distributions are not, so the transforms
/// to uniform and normal are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one variate per call).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn from a discrete distribution given by `weights` (sum 1).
  template <typename Range>
  std::size_t categorical(const Range& weights) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t last = 0;
    std::size_t i = 0;
    for (double w : weights) {
      acc += w;
      if (w > 0.0) last = i;
      if (u < acc) return i;
      ++i;
    }
    return last;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace uqxai
