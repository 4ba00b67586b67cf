#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fegut {

/// Deterministic Gaussian sampler. std::normal_distribution is
/// implementation-defined, so Box-Muller is done by hand to keep datasets
/// byte-identical across standard libraries.
class GaussianSampler {
 public:
  explicit GaussianSampler(uint64_t seed) : gen_(seed) {}

  /// One N(0,1) draw.
  double standard_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

  /// One N(0, sigma^2) draw. sigma == 0 consumes no randomness so that
  /// noise-free datasets stay aligned with noisy ones draw-for-draw.
  double normal(double sigma) {
    if (sigma == 0.0) return 0.0;
    return sigma * standard_normal();
  }

 private:
  double uniform01() {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 gen_;
  bool have_spare_{false};
  double spare_{0.0};
};

}  // namespace fegut
