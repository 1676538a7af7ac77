#include "gm3/smalleig.hpp"

#include <cmath>

#include "gm3/errors.hpp"
#include "gm3/profile.hpp"
#include "gm3/roots.hpp"

namespace gm3 {

namespace {

double sech2(double z) {
  const double e = std::exp(-2.0 * std::abs(z));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

const MomentTable& core_moments() {
  static const MomentTable m = moments(0.0);
  return m;
}

}  // namespace

TauH tau_h_threshold(double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidParameter, "c must be positive");
  const MomentTable& m = core_moments();
  return {7.0 * c / 6.0, c * m.J1 / m.J2};
}

double k_factor(const ModelParams& p) {
  p.validate();
  const double r = p.b / p.Dv;
  return core_moments().J3 / 3.0 * r * sech2(std::sqrt(r) * p.l);
}

DriftSpectrum small_lambda_roots(double tau, const ModelParams& p) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidParameter, "tau must be positive");
  p.validate();
  const MomentTable& m = core_moments();
  const double ratio = m.J1 / m.J2;
  DriftSpectrum out;
  out.k = k_factor(p);
  out.tau_h = p.c * ratio;
  const double dk = p.delta1 * out.k;
  out.coefficients = {ratio * tau, ratio * p.c - tau + dk * tau / m.J2, dk * p.c / m.J2};
  out.lambda_pair = quadratic_roots(out.coefficients[0], out.coefficients[1], out.coefficients[2]);
  out.re_asym = 3.0 / (7.0 * tau) * (tau - 7.0 * p.c / 6.0);
  out.im_asym = std::sqrt(p.delta1 * (5.0 / 6.0) * out.k * p.c / tau);
  out.lambda_linearized = -dk / (m.J1 - tau * m.J2 / p.c);
  return out;
}

double eta_eval(double x, const ModelParams& p, double V0) {
  const double k = std::sqrt(p.b / p.Dv);
  // C cosh(k(x+l)) on x < 0 and -C cosh(k(x-l)) on x > 0, C = V0 J0/(2 c Dv cosh(kl));
  // the cosh ratio is formed from exponentials so large kl does not overflow.
  const double scale = V0 * core_moments().J0 / (2.0 * p.c * p.Dv);
  const double r = std::abs(x);
  const double ratio = std::exp(-k * r) * (1.0 + std::exp(-2.0 * k * (p.l - r))) /
                       (1.0 + std::exp(-2.0 * k * p.l));
  return x < 0.0 ? scale * ratio : -scale * ratio;
}

EtaProfile eta_profile(const ModelParams& p, double V0, Eigen::Index n) {
  p.validate();
  if (n < 3) throw Error(ErrorKind::GridTooSmall, "eta profile needs n >= 3");
  const double k = std::sqrt(p.b / p.Dv);
  const double J0 = core_moments().J0;
  EtaProfile out;
  out.x = Eigen::VectorXd::LinSpaced(n, -p.l, p.l);
  out.eta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eta(i) = out.x(i) == 0.0 ? 0.0 : eta_eval(out.x(i), p, V0);
  }
  out.eta_minus = V0 * J0 / (2.0 * p.c * p.Dv);
  out.eta_plus = -out.eta_minus;
  out.eta_x_mean = V0 / (2.0 * p.c * p.Dv) * k * J0 * std::tanh(k * p.l);
  const double t = std::tanh(k * p.l);
  out.eta_x_mean_upper = p.b * p.c / (6.0 * p.Dv) * J0 * t * t;
  return out;
}

}  // namespace gm3
