#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "gm3/model.hpp"

namespace gm3 {

struct TauH {
  double closed_form = 0.0;  // 7c/6
  double quadrature = 0.0;   // c int w_y^2 / int w w_y^2 from quadrature
};

/// Drift-Hopf threshold tau_h = c J1/J2.
TauH tau_h_threshold(double c);

/// k = (int w^3 / 3) (b/Dv) sech^2(sqrt(b/Dv) l).
double k_factor(const ModelParams& p);

struct DriftSpectrum {
  double tau_h = 0.0;
  double k = 0.0;
  std::array<std::complex<double>, 2> lambda_pair{};  // roots of the quadratic
  std::array<double, 3> coefficients{};                // {A, B, C} of A l^2 + B l + C
  double re_asym = 0.0;                                // (3/(7 tau))(tau - 7c/6)
  double im_asym = 0.0;                                // sqrt(delta1 (5/6) k c / tau)
  double lambda_linearized = 0.0;  // single root with tau/(c + tau lambda) replaced by tau/c
};

/// Small eigenvalues at tau > 0 (theta = 0) from
///   lambda (J1 - tau J2/(c + tau lambda)) = -delta1 k,
/// cleared of the denominator.
DriftSpectrum small_lambda_roots(double tau, const ModelParams& p);

struct EtaProfile {
  Eigen::VectorXd x;
  Eigen::VectorXd eta;   // value at x = 0 is the mean of the one-sided limits
  double eta_minus = 0.0;  // eta(0-)
  double eta_plus = 0.0;   // eta(0+)
  double eta_x_mean = 0.0;
  double eta_x_mean_upper = 0.0;  // closed form with V0 = V0+ substituted
};

/// Odd outer correction eta on |x| < l, x != 0.
double eta_eval(double x, const ModelParams& p, double V0);

/// eta on n nodes of [-l, l] together with <eta_x>.
EtaProfile eta_profile(const ModelParams& p, double V0, Eigen::Index n = 2001);

}  // namespace gm3
