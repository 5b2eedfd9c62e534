#include "gedecomp/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gedecomp::kernels::scalar {

double sum(std::span<const double> x) noexcept {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double power_sum(std::span<const double> x, double scale, double theta) noexcept {
  double acc = 0.0;
  if (theta == 2.0) {
    for (double v : x) {
      const double y = scale * v;
      acc += y * y;
    }
  } else if (theta == 1.0) {
    for (double v : x) acc += scale * v;
  } else if (theta == -1.0) {
    for (double v : x) acc += 1.0 / (scale * v);
  } else if (theta == 0.0) {
    acc = static_cast<double>(x.size());
  } else {
    for (double v : x) acc += std::pow(scale * v, theta);
  }
  return acc;
}

double log_sum(std::span<const double> x, double scale) noexcept {
  double acc = 0.0;
  for (double v : x) acc += std::log(scale * v);
  return acc;
}

double xlogx_sum(std::span<const double> x, double scale) noexcept {
  double acc = 0.0;
  for (double v : x) {
    const double y = scale * v;
    acc += y * std::log(y);
  }
  return acc;
}

void bracket_counts(std::span<const double> x, std::span<const double> interior,
                    std::span<double> counts) noexcept {
  for (double v : x) {
    const auto g = std::upper_bound(interior.begin(), interior.end(), v) - interior.begin();
    counts[static_cast<std::size_t>(g)] += 1.0;
  }
}

}  // namespace gedecomp::kernels::scalar
