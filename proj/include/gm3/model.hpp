#pragma once

#include <optional>

#include <Eigen/Dense>

namespace gm3 {

/// Constants of the three-component system
///
///   u_t        = a - u + u^3/(w v) + delta1 u_xx
///   theta v_t  = u^2 - b v + Dv v_xx
///   tau w_t    = u - c w + delta2 w_xx
///
/// on |x| < l with homogeneous Neumann conditions. delta2 defaults to
/// delta1^2 unless explicitly overridden.
struct ModelParams {
  double a = 0.01;
  double b = 1.0;
  double c = 1.0;
  double delta1 = 1e-4;
  std::optional<double> delta2_override;
  double Dv = 1.0;
  double theta = 0.0;
  double tau = 0.0;
  double l = 1.0;

  double delta2() const { return delta2_override ? *delta2_override : delta1 * delta1; }
  double sqrt_delta1() const;

  /// Throws InvalidParameter if any positivity constraint is violated.
  void validate() const;

  /// Validated copy; the usual way to build parameters.
  static ModelParams checked(const ModelParams& p);
};

/// Uniform 1-D grid with both endpoints on the nodes.
class Grid1D {
public:
  Grid1D(double x_begin, double x_end, Eigen::Index n);

  static Grid1D full(double l, Eigen::Index n) { return Grid1D(-l, l, n); }
  static Grid1D half(double l, Eigen::Index n) { return Grid1D(0.0, l, n); }

  Eigen::Index size() const { return x_.size(); }
  double h() const { return h_; }
  double front() const { return x_(0); }
  double back() const { return x_(x_.size() - 1); }
  const Eigen::VectorXd& x() const { return x_; }
  double operator[](Eigen::Index i) const { return x_(i); }

private:
  Eigen::VectorXd x_;
  double h_;
};

/// Nodal values of (u, v, w).
struct FieldTriple {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Eigen::VectorXd w;

  Eigen::Index size() const { return u.size(); }
  bool all_finite() const { return u.allFinite() && v.allFinite() && w.allFinite(); }
  static FieldTriple constant(Eigen::Index n, double u0, double v0, double w0);
};

/// The uniform steady state (a+bc, (a+bc)^2/b, (a+bc)/c).
FieldTriple homogeneous_state(const ModelParams& p, Eigen::Index n);

/// Pointwise kinetics (F_u, F_v, F_w) = (a - u + u^3/(wv), u^2 - bv, u - cw);
/// throws DegenerateDenominator when |v w| < denom_tol anywhere.
FieldTriple reaction_terms(const FieldTriple& fields, const ModelParams& p,
                           double denom_tol = 1e-12);

/// Second-order Laplacian with u_x = 0 at both ends, imposed through a
/// reflected ghost node (u_{-1} = u_1, u_{n} = u_{n-2}).
Eigen::VectorXd laplacian_neumann(const Eigen::Ref<const Eigen::VectorXd>& field, double h);

}  // namespace gm3
