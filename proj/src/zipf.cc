#include "bohm/zipf.h"

#include <cmath>

#include "bohm/types.h"

namespace bohm {

double ZipfGen::zeta(std::uint64_t n, double theta) {
  double sum = 0;
  for (std::uint64_t i = 1; i <= n; ++i)
    sum += std::pow(static_cast<double>(i), -theta);
  return sum;
}

ZipfGen::ZipfGen(std::uint64_t n, double theta) : n_(n), theta_(theta) {
  if (n == 0) throw ConfigError("zipf key space must be non-empty");
  if (!(theta >= 0 && theta < 1))
    throw ConfigError("zipf theta must be in [0, 1)");
  zetan_ = zeta(n, theta);
  alpha_ = 1.0 / (1.0 - theta);
  half_pow_theta_ = std::pow(0.5, theta);
  const double zeta2 = 1.0 + half_pow_theta_;
  const double dn = static_cast<double>(n);
  eta_ = n <= 2 ? 1.0
                : (1.0 - std::pow(2.0 / dn, 1.0 - theta)) / (1.0 - zeta2 / zetan_);
}

std::uint64_t ZipfGen::next(std::mt19937_64& rng) const {
  const double u = unit_uniform(rng);
  const double uz = u * zetan_;
  if (uz < 1.0) return 0;
  if (n_ > 1 && uz < 1.0 + half_pow_theta_) return 1;
  auto k = static_cast<std::uint64_t>(static_cast<double>(n_) *
                                      std::pow(eta_ * u - eta_ + 1.0, alpha_));
  return k < n_ ? k : n_ - 1;
}

}  // namespace bohm
