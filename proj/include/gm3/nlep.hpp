#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gm3/model.hpp"
#include "gm3/tridiag.hpp"

namespace gm3 {

using cdouble = std::complex<double>;

/// Local operator phi'' - phi + kappa w_c phi on [-Ly, Ly] with Dirichlet
/// ends, discretized by central differences at two resolutions (n and
/// 2n-1 nodes) so that quadratures can be Richardson-extrapolated.
class LineOperator {
public:
  struct Level {
    double h = 0.0;
    Eigen::VectorXd y;
    Eigen::VectorXd w;   // w_c at the nodes
    Eigen::VectorXd w2;  // w_c^2
  };

  explicit LineOperator(Eigen::Index n = 4001, double Ly = 20.0, double gamma = 0.0);

  Eigen::Index n() const { return coarse_.y.size(); }
  double Ly() const { return Ly_; }
  double gamma() const { return gamma_; }
  const Level& coarse() const { return coarse_; }
  const Level& fine() const { return fine_; }

  /// Matrix of phi'' - (1 - 2 gamma) phi + kappa w phi - lambda phi on one level.
  template <typename Scalar>
  Tridiagonal<Scalar> assemble(const Level& level, Scalar kappa, Scalar lambda) const {
    const Eigen::Index m = level.y.size();
    Tridiagonal<Scalar> t(m);
    const double ih2 = 1.0 / (level.h * level.h);
    const double s2 = 1.0 - 2.0 * gamma_;
    for (Eigen::Index i = 0; i < m; ++i) t.diag(i) = -2.0 * ih2 - s2 + kappa * level.w(i) - lambda;
    t.lower.setConstant(Scalar(ih2));
    t.upper.setConstant(Scalar(ih2));
    return t;
  }

  /// int w (L - lambda)^{-1} w^2 with L = phi'' - phi + kappa w phi,
  /// extrapolated from both levels. Throws NearSingularResolvent when the
  /// solve is numerically singular.
  cdouble resolvent_integral(cdouble kappa, cdouble lambda) const;

private:
  double Ly_;
  double gamma_;
  Level coarse_;
  Level fine_;
};

/// f(lambda) = int w (L0 - lambda)^{-1} w^2.
cdouble f_lambda(cdouble lambda, const LineOperator& op);

/// g(lambda; c, tau) with the coupling 2 + tau lambda/(c + tau lambda).
cdouble g_lambda(cdouble lambda, double c, double tau, const LineOperator& op);

/// Principal-branch complex tanh that does not overflow for large |Re z|.
cdouble tanh_stable(cdouble z);

/// A(lambda; theta) for a spike of level V0:
///   c^2 sqrt(Dv) sqrt(b + theta lambda) tanh(sqrt((b + theta lambda)/Dv) l) / V0.
cdouble A_multiplier(cdouble lambda, double theta, const ModelParams& p, double V0);

/// The same multiplier on the upper branch V0 = V0+ (small-a asymptotic):
///   3 sqrt(1 + theta_hat lambda) tanh(l sqrt(b/Dv) sqrt(1 + theta_hat lambda)) / tanh(l sqrt(b/Dv)).
cdouble A_upper(cdouble lambda, double theta, const ModelParams& p);

enum class Verdict { Stable, Unstable, Neutral, Hopf };
const char* to_string(Verdict v);

struct SpectrumResult {
  cdouble lambda{0.0, 0.0};
  double threshold = 0.0;
  double omega = 0.0;
  Verdict verdict = Verdict::Stable;
  double residual = 0.0;
  int iterations = 0;
};

/// theta = tau = 0 verdict from A(V0) against 6.
Verdict classify_branch(double V0, const ModelParams& p);

/// theta_h on the upper branch (tau = 0): root (omega, theta) of
/// f(i omega) = A_upper(i omega; theta). guess = (omega, theta).
SpectrumResult hopf_theta(const ModelParams& p, const LineOperator& op,
                          std::pair<double, double> guess = {0.87, 2.75});

/// theta_h along a list of Dv values, each solve seeded by the previous one.
std::vector<SpectrumResult> hopf_theta_curve(const ModelParams& p, const std::vector<double>& Dvs,
                                             const LineOperator& op);

/// tau_lh (theta = 0, upper branch): root (omega, tau) of g(i omega; c, tau) = 3.
SpectrumResult hopf_tau_large(const ModelParams& p, const LineOperator& op,
                              std::pair<double, double> guess = {0.5, 6.0});

/// Positive root of 4 + 3 tau lambda/(c + tau lambda) - 2 lambda - sqrt(1 + lambda) = 0.
double lambda0_root(double tau, double c);

/// Top eigenvalues (descending) of the discretized phi'' - phi + kappa w phi
/// on the coarse level of op.
std::vector<double> top_eigenvalues(const LineOperator& op, double kappa, int count);

/// Unit eigenvector of the same operator for a computed eigenvalue, by
/// inverse iteration.
Eigen::VectorXd eigenvector(const LineOperator& op, double kappa, double eigenvalue);

}  // namespace gm3
