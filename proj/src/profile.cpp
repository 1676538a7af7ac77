#include "gm3/profile.hpp"

#include <cmath>
#include <sstream>

#include "gm3/errors.hpp"

namespace gm3 {

namespace {

void require_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 0.5)) {
    std::ostringstream os;
    os << "gamma must lie in [0, 1/2), got " << gamma;
    throw Error(ErrorKind::InvalidParameter, os.str());
  }
}

double sech2(double z) {
  const double e = std::exp(-2.0 * std::abs(z));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

struct Integrands {
  double w, w2, wy2, wwy2, w3;
};

Integrands integrands(double y, double gamma) {
  const double w = wc_eval(y, gamma);
  const double wy = wc_derivative(y, gamma);
  return {w, w * w, wy * wy, w * wy * wy, w * w * w};
}

// Simpson sums of every integrand over [0, cutoff] with the given interval count.
Integrands simpson_pass(double gamma, double cutoff, int intervals) {
  const double h = cutoff / intervals;
  Integrands odd{}, even{}, ends{};
  auto accumulate = [](Integrands& acc, const Integrands& v, double weight) {
    acc.w += weight * v.w;
    acc.w2 += weight * v.w2;
    acc.wy2 += weight * v.wy2;
    acc.wwy2 += weight * v.wwy2;
    acc.w3 += weight * v.w3;
  };
  accumulate(ends, integrands(0.0, gamma), 1.0);
  accumulate(ends, integrands(cutoff, gamma), 1.0);
  for (int i = 1; i < intervals; ++i) {
    accumulate(i % 2 == 1 ? odd : even, integrands(i * h, gamma), 1.0);
  }
  Integrands out{};
  accumulate(out, ends, h / 3.0);
  accumulate(out, odd, 4.0 * h / 3.0);
  accumulate(out, even, 2.0 * h / 3.0);
  return out;
}

}  // namespace

double gamma_of(double a, double c, double delta1, double V0, double margin) {
  if (!(V0 > 0.0)) throw Error(ErrorKind::InvalidParameter, "V0 must be positive");
  const double q = a * c * std::sqrt(delta1) / V0;
  const double disc = 1.0 - 4.0 * q;
  if (disc < margin) {
    std::ostringstream os;
    os << "discriminant 1 - 4ac sqrt(delta1)/V0 = " << disc << " below margin " << margin;
    throw Error(ErrorKind::GammaBranchCollision, os.str());
  }
  // (1 - sqrt(disc))/2 rewritten without cancellation
  return 2.0 * q / (1.0 + std::sqrt(disc));
}

double wc_eval(double y, double gamma) {
  require_gamma(gamma);
  const double s2 = 1.0 - 2.0 * gamma;
  return 1.5 * s2 * sech2(0.5 * std::sqrt(s2) * std::abs(y));
}

double wc_derivative(double y, double gamma) {
  require_gamma(gamma);
  const double s2 = 1.0 - 2.0 * gamma;
  const double s = std::sqrt(s2);
  const double z = 0.5 * s * y;
  return -1.5 * s2 * s * sech2(z) * std::tanh(z);
}

InnerValues inner_profile(double y, double V0, double c, double gamma) {
  if (!(V0 > 0.0) || !(c > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "inner profile needs V0 > 0 and c > 0");
  }
  const double U0 = (V0 / c) * (wc_eval(y, gamma) + gamma);
  return {U0, U0 / c, V0};
}

MomentTable moments(double gamma, double cutoff, int intervals) {
  require_gamma(gamma);
  if (intervals % 2 != 0) ++intervals;
  const Integrands coarse = simpson_pass(gamma, cutoff, intervals);
  const Integrands fine = simpson_pass(gamma, cutoff, 2 * intervals);

  auto check = [](double c1, double c2, const char* name) {
    if (std::abs(c2 - c1) > 1e-8) {
      std::ostringstream os;
      os << "moment " << name << " refinements differ by " << std::abs(c2 - c1);
      throw Error(ErrorKind::QuadratureNotConverged, os.str());
    }
    return c2 + (c2 - c1) / 15.0;
  };

  // beyond the cutoff w ~ 6 s^2 e^{-s y} and w_y ~ -6 s^3 e^{-s y}
  const double s = std::sqrt(1.0 - 2.0 * gamma);
  const double e1 = std::exp(-s * cutoff);
  const double tail_w = 3.0 * s * (1.0 - std::tanh(0.5 * s * cutoff));
  const double tail_w2 = 18.0 * std::pow(s, 3) * e1 * e1;
  const double tail_wy2 = 18.0 * std::pow(s, 5) * e1 * e1;
  const double tail_wwy2 = 72.0 * std::pow(s, 7) * e1 * e1 * e1;
  const double tail_w3 = 72.0 * std::pow(s, 5) * e1 * e1 * e1;

  MomentTable m;
  m.I1 = check(coarse.w, fine.w, "int w") + tail_w;
  m.I2 = check(coarse.w2, fine.w2, "int w^2") + tail_w2;
  m.J0 = 2.0 * m.I2;
  m.J1 = 2.0 * (check(coarse.wy2, fine.wy2, "int w_y^2") + tail_wy2);
  m.J2 = 2.0 * (check(coarse.wwy2, fine.wwy2, "int w w_y^2") + tail_wwy2);
  m.J3 = 2.0 * (check(coarse.w3, fine.w3, "int w^3") + tail_w3);
  return m;
}

SpikeProfile make_spike_profile(double V0, const ModelParams& p) {
  SpikeProfile out;
  out.V0 = V0;
  out.gamma = gamma_of(p.a, p.c, p.delta1, V0);
  out.u0p = V0 * out.gamma / (p.c * p.sqrt_delta1());
  out.flux_coeff = 3.0 * V0 * V0 * std::sqrt(1.0 - 2.0 * out.gamma) /
                   (p.Dv * p.c * p.c * p.sqrt_delta1());
  out.moments = moments(out.gamma);
  return out;
}

double far_field_flux(const SpikeProfile& profile, const ModelParams& p) {
  return 3.0 * profile.V0 * profile.V0 * std::sqrt(1.0 - 2.0 * profile.gamma) /
         (p.sqrt_delta1() * p.Dv * p.c * p.c);
}

}  // namespace gm3
