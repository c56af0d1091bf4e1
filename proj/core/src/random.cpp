#include "knnshap/random.hpp"

#include <cmath>
#include <numbers>

namespace knnshap {

double NormalSampler::operator()(std::mt19937_64& gen) {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  while (u == 0.0) u = uniform_unit(gen);
  const double v = uniform_unit(gen);
  const double radius = std::sqrt(-2.0 * std::log(u));
  const double angle = 2.0 * std::numbers::pi * v;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace knnshap
