#pragma once

// Shared helpers for the test suites.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

namespace test_support {

// Least-squares slope of log(err) against log(scale); convergence order when
// scale is h (or the time step) and err decreases with it.
inline double fitted_order(const std::vector<double>& scales,
                           const std::vector<double>& errs) {
  const int n = static_cast<int>(scales.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(scales[i]);
    const double y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline Eigen::VectorXd random_vector(int n, unsigned seed, double lo = -1.0,
                                     double hi = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace test_support
