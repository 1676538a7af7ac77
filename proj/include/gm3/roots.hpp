#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <utility>

#include "gm3/errors.hpp"

namespace gm3 {

/// Both roots of A x^2 + B x + C = 0 (A != 0), computed without
/// cancellation. Complex pairs are returned with the positive imaginary
/// part first.
inline std::array<std::complex<double>, 2> quadratic_roots(double A, double B, double C) {
  const double disc = B * B - 4.0 * A * C;
  if (disc >= 0.0) {
    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
    if (q == 0.0) return {std::complex<double>(0.0), std::complex<double>(0.0)};
    double r1 = q / A;
    double r2 = C / q;
    if (r1 < r2) std::swap(r1, r2);
    return {std::complex<double>(r1), std::complex<double>(r2)};
  }
  const double re = -B / (2.0 * A);
  const double im = std::sqrt(-disc) / (2.0 * std::abs(A));
  return {std::complex<double>(re, im), std::complex<double>(re, -im)};
}

/// Brent's method on a sign-changing bracket [lo, hi].
inline double brent_root(const std::function<double(double)>& f, double lo, double hi,
                         double xtol = 1e-14, int max_iter = 200) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    std::ostringstream os;
    os << "no sign change on [" << lo << ", " << hi << "]: f = " << fa << ", " << fb;
    throw Error(ErrorKind::NoRootInBracket, os.str());
  }
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * 2.2e-16 * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : std::copysign(tol, m);
    fb = f(b);
  }
  return b;
}

}  // namespace gm3
