#pragma once

#include <cstdint>
#include <random>

namespace bohm {

// Uniform double in [0, 1) from the top 53 bits of one draw. Portable, unlike
// std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  auto k = static_cast<std::uint64_t>(unit_uniform(rng) * static_cast<double>(n));
  return k < n ? k : n - 1;
}

// Zipfian keys over [0, n) with the closed-form generator of Gray et al.
// ("Quickly generating billion-record synthetic databases"). Key 0 is the
// most popular; P(0) = 1 / zeta(n, theta). theta = 0 is uniform.
class ZipfGen {
 public:
  // theta must lie in [0, 1).
  ZipfGen(std::uint64_t n, double theta);

  std::uint64_t next(std::mt19937_64& rng) const;

  std::uint64_t n() const { return n_; }
  double theta() const { return theta_; }
  double zetan() const { return zetan_; }

  // Generalized harmonic number sum_{i=1..n} 1/i^theta.
  static double zeta(std::uint64_t n, double theta);

 private:
  std::uint64_t n_;
  double theta_;
  double zetan_;
  double alpha_;
  double eta_;
  double half_pow_theta_;
};

}  // namespace bohm
