#pragma once

#include <array>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "gm3/model.hpp"

namespace gm3 {

// Outer problem D_v (f(u) u_x)_x = R(u) on 0 < x < l, u_x(l) = 0, obtained by
// eliminating v = c u^2/(u-a) and w = u/c away from the spike core.

double R_of(double u, const ModelParams& p);
double f_of(double u, const ModelParams& p);
double R_prime(double u, const ModelParams& p);

/// Closed-form antiderivative of -R f.
double G_of(double xi, const ModelParams& p);
/// G(hi) - G(lo), evaluated term by term so that nearby arguments do not
/// cancel catastrophically.
double G_difference(double hi, double lo, const ModelParams& p);

/// chi(mu) in the integrated-by-parts form, for a < u0p < mu <= 2a.
double chi_of(double mu, double u0p, const ModelParams& p);
/// chi restricted to the partial range [u0p, u], u0p <= u <= mu.
double chi_partial(double u, double mu, double u0p, const ModelParams& p);
/// The original improper integral of f / sqrt(G(mu) - G(xi)); cross-check only.
double chi_improper(double mu, double u0p, const ModelParams& p);

struct OuterSolve {
  double V0 = 0.0;
  double mu = 0.0;
  double u0p = 0.0;
  double gamma = 0.0;
  double chi_of_mu = 0.0;
  bool converged = false;
  std::array<double, 2> residuals{};
  int iterations = 0;
};

enum class Regime { Nucleating, Homogeneous };

struct NucleationResult {
  Regime regime = Regime::Homogeneous;
  double chi_max = 0.0;
  double D_nuc = 0.0;
  double V0 = 0.0;   // spike level at the threshold
  double u0p = 0.0;
};

/// Matching residuals (flux condition, length condition) at (V0, mu) for
/// the given Dv. Throws when (V0, mu) leaves the admissible set.
std::array<double, 2> outer_residuals(double V0, double mu, double Dv, const ModelParams& p);

/// Threshold D_nuc = 2 l^2 / chi(2a)^2 below which the one-spike outer
/// solution ceases to exist. Returns Regime::Homogeneous when bc <= a; pass
/// expect_nucleation to turn that case into a RegimeMismatch error.
NucleationResult nucleation_threshold(const ModelParams& p, bool expect_nucleation = false);

/// Damped Newton for (V0, mu) at p.Dv. Default start: small-a V0+ and mu = 1.5 a.
OuterSolve solve_V0_mu(const ModelParams& p,
                       std::optional<std::pair<double, double>> initial_guess = std::nullopt,
                       double newton_tol = 1e-10, int max_iter = 100);

/// u(x) on the outer region from chi(u(x)) = sqrt(2/Dv) |x|.
Eigen::VectorXd outer_u_profile(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const OuterSolve& solve, const ModelParams& p);

struct SmallARoots {
  double V0_plus = 0.0;   // exact roots of the small-a quadratic
  double V0_minus = 0.0;
  double V0_plus_asymptotic = 0.0;
  double V0_minus_asymptotic = 0.0;
  std::array<double, 3> coefficients{};  // 3 V^2 - B V + C as {3, -B, C}
};

struct HomogeneousRoots {
  double V0_plus = 0.0;
  double V0_minus = 0.0;
  double v0_plus = 0.0;   // V0 / sqrt(delta1)
  double v0_minus = 0.0;
  std::array<double, 3> coefficients{};
};

SmallARoots smalla_roots(const ModelParams& p);
HomogeneousRoots homog_roots(const ModelParams& p);

enum class Background { SmallA, Homogeneous };

/// Outer inhibitor v(x) relaxing from V0/sqrt(delta1) at x = 0 to the plateau
/// a^2/b (SmallA) or (a+bc)^2/b (Homogeneous), with v_x(+-l) = 0.
double v_outer_profile(double x, double V0, const ModelParams& p, Background background);
double v_outer_derivative(double x, double V0, const ModelParams& p, Background background);

}  // namespace gm3
