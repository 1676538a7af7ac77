#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "gm3/errors.hpp"

namespace gm3 {

/// Tridiagonal matrix stored by diagonals: row i is
///   lower(i-1) x(i-1) + diag(i) x(i) + upper(i) x(i+1).
template <typename Scalar>
struct Tridiagonal {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector lower;  // size n-1
  Vector diag;   // size n
  Vector upper;  // size n-1

  explicit Tridiagonal(Eigen::Index n = 0)
      : lower(Vector::Zero(n > 0 ? n - 1 : 0)), diag(Vector::Zero(n)),
        upper(Vector::Zero(n > 0 ? n - 1 : 0)) {}

  Eigen::Index size() const { return diag.size(); }

  template <typename Derived>
  Vector apply(const Eigen::MatrixBase<Derived>& x) const {
    const Eigen::Index n = size();
    Vector y = diag.cwiseProduct(x);
    y.head(n - 1) += upper.cwiseProduct(x.tail(n - 1));
    y.tail(n - 1) += lower.cwiseProduct(x.head(n - 1));
    return y;
  }

  /// Max-row-sum norm.
  double norm_inf() const {
    const Eigen::Index n = size();
    Eigen::VectorXd rows = diag.cwiseAbs().template cast<double>();
    rows.head(n - 1) += upper.cwiseAbs().template cast<double>();
    rows.tail(n - 1) += lower.cwiseAbs().template cast<double>();
    return rows.maxCoeff();
  }
};

/// Thomas elimination without pivoting. Throws DegenerateDenominator on an
/// exactly vanishing pivot; callers that need conditioning information
/// estimate it from the solution.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve_tridiagonal(const Tridiagonal<Scalar>& m,
                                                           const Eigen::MatrixBase<Derived>& rhs) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = m.size();
  Vector cp(n);
  Vector x(n);
  Scalar pivot = m.diag(0);
  if (std::abs(pivot) == 0.0) throw Error(ErrorKind::DegenerateDenominator, "zero pivot");
  cp(0) = n > 1 ? m.upper(0) / pivot : Scalar(0);
  x(0) = Scalar(rhs(0)) / pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    pivot = m.diag(i) - m.lower(i - 1) * cp(i - 1);
    if (std::abs(pivot) == 0.0) throw Error(ErrorKind::DegenerateDenominator, "zero pivot");
    cp(i) = i < n - 1 ? m.upper(i) / pivot : Scalar(0);
    x(i) = (Scalar(rhs(i)) - m.lower(i - 1) * x(i - 1)) / pivot;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) -= cp(i) * x(i + 1);
  return x;
}

/// Number of eigenvalues of the symmetric tridiagonal matrix (diag, off)
/// strictly greater than shift, from the Sturm sequence of T - shift.
inline Eigen::Index count_eigenvalues_above(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                            double shift) {
  Eigen::Index above = 0;
  double q = diag(0) - shift;
  const double tiny = std::numeric_limits<double>::min() * 1e4;
  for (Eigen::Index i = 0;; ++i) {
    if (q == 0.0) q = -tiny;
    // positive LDL^T pivots of T - shift <=> eigenvalues above shift
    if (q > 0.0) ++above;
    if (i + 1 >= diag.size()) break;
    q = diag(i + 1) - shift - off(i) * off(i) / q;
  }
  return above;
}

/// k-th largest eigenvalue (k = 0 is the top) of a symmetric tridiagonal
/// matrix by Sturm bisection.
inline double symmetric_tridiagonal_eigenvalue(const Eigen::VectorXd& diag,
                                               const Eigen::VectorXd& off, Eigen::Index k,
                                               double tol = 1e-13) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const Eigen::Index n = diag.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(off(i - 1));
    if (i + 1 < n) r += std::abs(off(i));
    lo = std::min(lo, diag(i) - r);
    hi = std::max(hi, diag(i) + r);
  }
  // invariant: count(hi) <= k < count(lo)
  while (hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (count_eigenvalues_above(diag, off, mid) > k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace gm3
