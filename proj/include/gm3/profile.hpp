#pragma once

#include "gm3/model.hpp"

namespace gm3 {

/// Integrals of the homoclinic core w_c. I1, I2 are half-line integrals;
/// the J's are over the whole line.
struct MomentTable {
  double I1 = 0.0;  // int_0^inf w
  double I2 = 0.0;  // int_0^inf w^2
  double J0 = 0.0;  // int w^2
  double J1 = 0.0;  // int w_y^2
  double J2 = 0.0;  // int w w_y^2
  double J3 = 0.0;  // int w^3
};

/// Inner-region data of a one-spike quasi-equilibrium.
struct SpikeProfile {
  double V0 = 0.0;
  double gamma = 0.0;
  double u0p = 0.0;         // outer limit u(0+) = V0 gamma / (c sqrt(delta1))
  double flux_coeff = 0.0;  // 3 V0^2 sqrt(1-2 gamma) / (Dv c^2 sqrt(delta1))
  MomentTable moments;
};

struct InnerValues {
  double U0;
  double W0;
  double V;
};

/// Smaller root of gamma^2 - gamma + a c sqrt(delta1)/V0 = 0. Throws
/// GammaBranchCollision when the discriminant 1 - 4 a c sqrt(delta1)/V0
/// falls below margin.
double gamma_of(double a, double c, double delta1, double V0, double margin = 1e-10);

/// w_c(y) = (3/2)(1-2 gamma) sech^2(sqrt(1-2 gamma) y / 2).
double wc_eval(double y, double gamma);

/// dw_c/dy.
double wc_derivative(double y, double gamma);

/// Leading-order inner solution U0 = (V0/c)(w_c + gamma), W0 = U0/c, V = V0.
InnerValues inner_profile(double y, double V0, double c, double gamma);

/// Core moments by Richardson-extrapolated Simpson quadrature on [0, cutoff]
/// with closed-form exponential tails.
MomentTable moments(double gamma, double cutoff = 40.0, int intervals = 4000);

SpikeProfile make_spike_profile(double V0, const ModelParams& p);

/// Limit of |v_x| as x -> 0+ in outer units.
double far_field_flux(const SpikeProfile& profile, const ModelParams& p);

}  // namespace gm3
