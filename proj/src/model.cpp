#include "gm3/model.hpp"

#include <cmath>
#include <sstream>

#include "gm3/errors.hpp"

namespace gm3 {

namespace {

void require(bool ok, const char* what, double value) {
  if (!ok) {
    std::ostringstream os;
    os << what << " (got " << value << ")";
    throw Error(ErrorKind::InvalidParameter, os.str());
  }
}

}  // namespace

double ModelParams::sqrt_delta1() const { return std::sqrt(delta1); }

void ModelParams::validate() const {
  require(std::isfinite(a) && a >= 0.0, "a must be >= 0", a);
  require(std::isfinite(b) && b > 0.0, "b must be > 0", b);
  require(std::isfinite(c) && c > 0.0, "c must be > 0", c);
  require(std::isfinite(delta1) && delta1 > 0.0, "delta1 must be > 0", delta1);
  require(std::isfinite(delta2()) && delta2() > 0.0, "delta2 must be > 0", delta2());
  require(std::isfinite(Dv) && Dv > 0.0, "Dv must be > 0", Dv);
  require(std::isfinite(theta) && theta >= 0.0, "theta must be >= 0", theta);
  require(std::isfinite(tau) && tau >= 0.0, "tau must be >= 0", tau);
  require(std::isfinite(l) && l > 0.0, "l must be > 0", l);
}

ModelParams ModelParams::checked(const ModelParams& p) {
  p.validate();
  return p;
}

Grid1D::Grid1D(double x_begin, double x_end, Eigen::Index n) {
  if (n < 3) throw Error(ErrorKind::GridTooSmall, "grid needs at least 3 nodes");
  if (!(x_end > x_begin)) throw Error(ErrorKind::InvalidParameter, "grid interval is empty");
  h_ = (x_end - x_begin) / static_cast<double>(n - 1);
  x_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) x_(i) = x_begin + h_ * static_cast<double>(i);
  x_(n - 1) = x_end;
}

FieldTriple FieldTriple::constant(Eigen::Index n, double u0, double v0, double w0) {
  return {Eigen::VectorXd::Constant(n, u0), Eigen::VectorXd::Constant(n, v0),
          Eigen::VectorXd::Constant(n, w0)};
}

FieldTriple homogeneous_state(const ModelParams& p, Eigen::Index n) {
  const double u = p.a + p.b * p.c;
  return FieldTriple::constant(n, u, u * u / p.b, u / p.c);
}

FieldTriple reaction_terms(const FieldTriple& fields, const ModelParams& p, double denom_tol) {
  const auto& u = fields.u.array();
  const auto& v = fields.v.array();
  const auto& w = fields.w.array();
  const Eigen::ArrayXd vw = v * w;
  if ((vw.abs() < denom_tol).any()) {
    throw Error(ErrorKind::DegenerateDenominator, "|v w| below tolerance in u^3/(w v)");
  }
  FieldTriple out;
  out.u = (p.a - u + u.cube() / vw).matrix();
  out.v = (u.square() - p.b * v).matrix();
  out.w = (u - p.c * w).matrix();
  return out;
}

Eigen::VectorXd laplacian_neumann(const Eigen::Ref<const Eigen::VectorXd>& field, double h) {
  const Eigen::Index n = field.size();
  if (n < 3) throw Error(ErrorKind::GridTooSmall, "Laplacian needs at least 3 nodes");
  const double inv_h2 = 1.0 / (h * h);
  Eigen::VectorXd out(n);
  out(0) = 2.0 * (field(1) - field(0)) * inv_h2;
  out(n - 1) = 2.0 * (field(n - 2) - field(n - 1)) * inv_h2;
  out.segment(1, n - 2) =
      ((field.head(n - 2) + field.tail(n - 2)) - 2.0 * field.segment(1, n - 2)) * inv_h2;
  return out;
}

}  // namespace gm3
