#pragma once

#include <functional>

#include <Eigen/Dense>

namespace gm3 {

/// Composite Simpson rule on equally spaced samples; an even number of
/// intervals is required (odd sample count).
template <typename Derived>
typename Derived::Scalar simpson(const Eigen::MatrixBase<Derived>& samples, double h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = samples.size();
  Scalar odd(0), even(0);
  for (Eigen::Index i = 1; i < n - 1; i += 2) odd += samples(i);
  for (Eigen::Index i = 2; i < n - 1; i += 2) even += samples(i);
  return (h / 3.0) * (samples(0) + samples(n - 1) + 4.0 * odd + 2.0 * even);
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of f on [lo, hi].
/// Throws QuadratureNotConverged if the requested tolerance
/// max(abs_tol, rel_tol |I|) is not met within max_intervals subdivisions.
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double lo, double hi,
                                double abs_tol = 1e-12, double rel_tol = 1e-12,
                                int max_intervals = 2000);

}  // namespace gm3
