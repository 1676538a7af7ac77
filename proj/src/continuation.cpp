#include "gm3/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

#include "gm3/errors.hpp"

namespace gm3 {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
// The interleaved unknowns make J banded, so the natural ordering keeps fill
// inside the band.
using Solver = Eigen::SparseLU<SpMat, Eigen::NaturalOrdering<int>>;

double max_abs(const Eigen::VectorXd& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

bool positive_state(const Eigen::VectorXd& X) {
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    if (!(X(i) > 0.0)) return false;
  }
  return true;
}

}  // namespace

SteadySystem::SteadySystem(const ModelParams& p, const Grid1D& grid)
    : p_(p), grid_(grid), n_(grid.size()) {
  p_.validate();
}

Eigen::VectorXd SteadySystem::pack(const FieldTriple& f) {
  const Eigen::Index n = f.size();
  Eigen::VectorXd X(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(3 * i) = f.u(i);
    X(3 * i + 1) = f.v(i);
    X(3 * i + 2) = f.w(i);
  }
  return X;
}

FieldTriple SteadySystem::unpack(const Eigen::VectorXd& X) const {
  FieldTriple f = FieldTriple::constant(n_, 0.0, 0.0, 0.0);
  for (Eigen::Index i = 0; i < n_; ++i) {
    f.u(i) = X(3 * i);
    f.v(i) = X(3 * i + 1);
    f.w(i) = X(3 * i + 2);
  }
  return f;
}

Eigen::VectorXd SteadySystem::residual(const Eigen::VectorXd& X) const {
  const FieldTriple f = unpack(X);
  const double h = grid_.h();
  const Eigen::VectorXd Lu = laplacian_neumann(f.u, h);
  const Eigen::VectorXd Lv = laplacian_neumann(f.v, h);
  const Eigen::VectorXd Lw = laplacian_neumann(f.w, h);
  const double ih2 = 1.0 / (h * h);
  const double su = 2.0 * p_.delta1 * ih2 + 1.0;
  const double sv = 2.0 * p_.Dv * ih2 + p_.b;
  const double sw = 2.0 * p_.delta2() * ih2 + p_.c;
  Eigen::VectorXd F(3 * n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    const double u = f.u(i), v = f.v(i), w = f.w(i);
    F(3 * i) = (p_.delta1 * Lu(i) + p_.a - u + u * u * u / (w * v)) / su;
    F(3 * i + 1) = (p_.Dv * Lv(i) - p_.b * v + u * u) / sv;
    F(3 * i + 2) = (p_.delta2() * Lw(i) - p_.c * w + u) / sw;
  }
  return F;
}

Eigen::VectorXd SteadySystem::dDv(const Eigen::VectorXd& X) const {
  const FieldTriple f = unpack(X);
  const double h = grid_.h();
  const double ih2 = 1.0 / (h * h);
  const double sv = 2.0 * p_.Dv * ih2 + p_.b;
  const Eigen::VectorXd Lv = laplacian_neumann(f.v, h);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(3 * n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    const double Fv = p_.Dv * Lv(i) - p_.b * f.v(i) + f.u(i) * f.u(i);
    d(3 * i + 1) = Lv(i) / sv - Fv * 2.0 * ih2 / (sv * sv);
  }
  return d;
}

Eigen::VectorXd SteadySystem::row_scale() const {
  const double ih2 = 1.0 / (grid_.h() * grid_.h());
  Eigen::VectorXd s(3 * n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    s(3 * i) = 2.0 * p_.delta1 * ih2 + 1.0;
    s(3 * i + 1) = 2.0 * p_.Dv * ih2 + p_.b;
    s(3 * i + 2) = 2.0 * p_.delta2() * ih2 + p_.c;
  }
  return s;
}

SpMat SteadySystem::jacobian(const Eigen::VectorXd& X) const {
  const double h = grid_.h();
  const double ih2 = 1.0 / (h * h);
  const double D[3] = {p_.delta1, p_.Dv, p_.delta2()};
  const double s[3] = {2.0 * D[0] * ih2 + 1.0, 2.0 * D[1] * ih2 + p_.b, 2.0 * D[2] * ih2 + p_.c};
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(n_) * 13);
  for (Eigen::Index i = 0; i < n_; ++i) {
    const double u = X(3 * i), v = X(3 * i + 1), w = X(3 * i + 2);
    const Eigen::Index r = 3 * i;
    for (int k = 0; k < 3; ++k) {
      const double off = D[k] * ih2 / s[k];
      if (i == 0) {
        trip.emplace_back(r + k, r + 3 + k, 2.0 * off);
      } else if (i == n_ - 1) {
        trip.emplace_back(r + k, r - 3 + k, 2.0 * off);
      } else {
        trip.emplace_back(r + k, r - 3 + k, off);
        trip.emplace_back(r + k, r + 3 + k, off);
      }
    }
    const double q = u * u * u / (w * v);
    trip.emplace_back(r, r, (-2.0 * D[0] * ih2 - 1.0 + 3.0 * q / u) / s[0]);
    trip.emplace_back(r, r + 1, -q / v / s[0]);
    trip.emplace_back(r, r + 2, -q / w / s[0]);
    trip.emplace_back(r + 1, r, 2.0 * u / s[1]);
    trip.emplace_back(r + 1, r + 1, (-2.0 * D[1] * ih2 - p_.b) / s[1]);
    trip.emplace_back(r + 2, r, 1.0 / s[2]);
    trip.emplace_back(r + 2, r + 2, (-2.0 * D[2] * ih2 - p_.c) / s[2]);
  }
  SpMat J(3 * n_, 3 * n_);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

FieldTriple steady_newton(const FieldTriple& initial, const ModelParams& p, const Grid1D& grid,
                          const NewtonOptions& options, NewtonReport* report) {
  const SteadySystem sys(p, grid);
  Eigen::VectorXd X = SteadySystem::pack(initial);
  if (!positive_state(X)) throw Error(ErrorKind::InvalidParameter, "initial state must be positive");
  Eigen::VectorXd F = sys.residual(X);
  std::vector<double> history{max_abs(F)};
  for (int iter = 0;; ++iter) {
    if (history.back() < options.tol) {
      if (report) *report = {iter, history};
      return sys.unpack(X);
    }
    if (iter >= options.max_iter) break;
    Solver lu;
    lu.compute(sys.jacobian(X));
    if (lu.info() != Eigen::Success) break;
    const Eigen::VectorXd dX = lu.solve(-F);
    double alpha = 1.0;
    bool accepted = false;
    const double norm0 = F.norm();
    for (int k = 0; k < 30; ++k, alpha *= 0.5) {
      const Eigen::VectorXd trial = X + alpha * dX;
      if (!positive_state(trial)) continue;
      const Eigen::VectorXd Ft = sys.residual(trial);
      if (Ft.norm() < (1.0 - 1e-4 * alpha) * norm0 || max_abs(Ft) < options.tol) {
        X = trial;
        F = Ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    history.push_back(max_abs(F));
  }
  std::ostringstream os;
  os << "steady Newton failed; max-norm residual history:";
  for (double r : history) os << ' ' << r;
  if (report) *report = {static_cast<int>(history.size()) - 1, history};
  throw Error(ErrorKind::NewtonDiverged, os.str());
}

namespace {

// Point on the extended unknown z = (X, Dv) with the weighted inner product
// <a, b> = xi a_X . b_X + a_Dv b_Dv, xi = 1 / dim(X).
struct Z {
  Eigen::VectorXd X;
  double Dv = 0.0;
};

struct Continuer {
  SteadySystem sys;
  double xi;
  const ContinuationOptions& opt;

  double dot(const Z& a, const Z& b) const { return xi * a.X.dot(b.X) + a.Dv * b.Dv; }
  double norm(const Z& a) const { return std::sqrt(dot(a, a)); }
  Z diff(const Z& a, const Z& b) const { return {a.X - b.X, a.Dv - b.Dv}; }
  Z axpy(const Z& a, double s, const Z& d) const { return {a.X + s * d.X, a.Dv + s * d.Dv}; }
  Z scaled(const Z& a, double s) const { return {s * a.X, s * a.Dv}; }

  // Solves [J c; xi row_X^T row_Dv] [x; y] = [r; q] by block elimination on
  // a factorization of J, followed by one step of iterative refinement.
  struct Bordered {
    Solver lu;
    SpMat J;
    Eigen::VectorXd c, rho, Jinv_c;
    double delta = 0.0;

    bool solve(const Eigen::VectorXd& r, double q, Eigen::VectorXd& x, double& y) const {
      auto once = [&](const Eigen::VectorXd& rr, double qq, Eigen::VectorXd& xx, double& yy) {
        const Eigen::VectorXd a = lu.solve(rr);
        const double den = delta - rho.dot(Jinv_c);
        if (den == 0.0 || !std::isfinite(den)) return false;
        yy = (qq - rho.dot(a)) / den;
        xx = a - Jinv_c * yy;
        return xx.allFinite() && std::isfinite(yy);
      };
      if (!once(r, q, x, y)) return false;
      const Eigen::VectorXd res_r = r - J * x - c * y;
      const double res_q = q - rho.dot(x) - delta * y;
      Eigen::VectorXd dx;
      double dy = 0.0;
      if (!once(res_r, res_q, dx, dy)) return false;
      x += dx;
      y += dy;
      return true;
    }
  };

  bool border(const Eigen::VectorXd& X, double Dv, const Z& row, Bordered& b) {
    sys.set_Dv(Dv);
    b.J = sys.jacobian(X);
    b.lu.compute(b.J);
    if (b.lu.info() != Eigen::Success) return false;
    b.c = sys.dDv(X);
    b.rho = xi * row.X;
    b.delta = row.Dv;
    b.Jinv_c = b.lu.solve(b.c);
    return b.Jinv_c.allFinite();
  }

  // Unit tangent at z oriented along ref.
  std::optional<Z> tangent(const Z& z, const Z& ref) {
    Bordered b;
    if (!border(z.X, z.Dv, ref, b)) return std::nullopt;
    Z t;
    if (!b.solve(Eigen::VectorXd::Zero(z.X.size()), 1.0, t.X, t.Dv)) return std::nullopt;
    const double nt = norm(t);
    if (!(nt > 0.0) || !std::isfinite(nt)) return std::nullopt;
    t = scaled(t, 1.0 / nt);
    if (dot(t, ref) < 0.0) t = scaled(t, -1.0);
    return t;
  }

  // Newton on G(z) = 0, <d, z - zp> = 0 starting from zp.
  std::optional<std::pair<Z, int>> correct(const Z& zp, const Z& d) {
    Z z = zp;
    for (int iter = 0; iter <= opt.corrector_iter; ++iter) {
      sys.set_Dv(z.Dv);
      const Eigen::VectorXd G = sys.residual(z.X);
      const double N = dot(d, diff(z, zp));
      if (max_abs(G) < opt.newton_tol && std::abs(N) < 1e-9) return std::make_pair(z, iter);
      if (iter == opt.corrector_iter) break;
      Bordered b;
      if (!border(z.X, z.Dv, d, b)) return std::nullopt;
      Z step;
      if (!b.solve(-G, -N, step.X, step.Dv)) return std::nullopt;
      double alpha = 1.0;
      Z trial;
      for (int k = 0; k < 10; ++k, alpha *= 0.5) {
        trial = axpy(z, alpha, step);
        if (positive_state(trial.X) && trial.Dv > 0.0) break;
      }
      if (!positive_state(trial.X) || !(trial.Dv > 0.0)) return std::nullopt;
      z = trial;
    }
    return std::nullopt;
  }

  // Inverse iteration for the smallest-magnitude eigenvalue of the unscaled
  // Jacobian S J, reusing the factorization of the scaled one.
  double stability_hint(const Z& z) {
    sys.set_Dv(z.Dv);
    Solver lu;
    lu.compute(sys.jacobian(z.X));
    if (lu.info() != Eigen::Success) return 0.0;
    const Eigen::VectorXd inv_scale = sys.row_scale().cwiseInverse();
    Eigen::VectorXd x = Eigen::VectorXd::Ones(z.X.size()).normalized();
    double estimate = 0.0;
    for (int it = 0; it < 30; ++it) {
      const Eigen::VectorXd y = lu.solve(inv_scale.cwiseProduct(x));
      const double xy = x.dot(y);
      if (xy != 0.0) estimate = 1.0 / xy;
      const double ny = y.norm();
      if (!(ny > 0.0) || !std::isfinite(ny)) break;
      x = y / ny;
    }
    return estimate;
  }

  BranchPoint make_point(const Z& z, double arclength, bool fold) {
    sys.set_Dv(z.Dv);
    BranchPoint bp;
    bp.Dv = z.Dv;
    bp.state = sys.unpack(z.X);
    bp.mu = bp.state.u(bp.state.size() - 1);
    bp.v0 = bp.state.v(0) * sys.params().sqrt_delta1();
    bp.arclength = arclength;
    bp.fold = fold;
    bp.residual = max_abs(sys.residual(z.X));
    bp.stability_hint = stability_hint(z);
    return bp;
  }
};

}  // namespace

Branch continue_branch(const ModelParams& p, double Dv_start, double Dv_target, double ds,
                       const ContinuationOptions& options) {
  if (!(Dv_start > 0.0) || !(Dv_target > 0.0) || Dv_start == Dv_target) {
    throw Error(ErrorKind::InvalidParameter, "need distinct positive Dv_start and Dv_target");
  }
  ModelParams p0 = p;
  p0.Dv = Dv_start;
  p0.validate();
  SimConfig gcfg;
  gcfg.params = p0;
  gcfg.n = options.n;
  gcfg.domain = options.domain;
  const Grid1D grid = make_grid(gcfg);

  const FieldTriple guess = options.initial ? *options.initial : asymptotic_spike(p0, grid, 0.0);
  if (guess.size() != grid.size()) throw Error(ErrorKind::InvalidParameter, "initial state size mismatch");
  const FieldTriple start = steady_newton(guess, p0, grid, {options.newton_tol, 50});

  Continuer C{SteadySystem(p0, grid), 1.0 / static_cast<double>(3 * grid.size()), options};
  Branch branch;
  Z z{SteadySystem::pack(start), Dv_start};
  const double direction = Dv_target < Dv_start ? -1.0 : 1.0;
  Z ref{Eigen::VectorXd::Zero(z.X.size()), direction};
  auto t0 = C.tangent(z, ref);
  if (!t0) throw Error(ErrorKind::StepFailure, "singular Jacobian at the starting point");
  Z t = *t0;
  double arclength = 0.0;
  branch.points.push_back(C.make_point(z, arclength, false));

  const double lo = std::min(Dv_start, Dv_target), hi = std::max(Dv_start, Dv_target);
  const double margin = 1e-9 * hi;
  ds = std::clamp(ds, options.ds_min, options.ds_max);
  std::optional<Z> previous;
  while (static_cast<int>(branch.points.size()) < options.max_points) {
    Z d = t;
    if (previous) {
      const Z sec = C.diff(z, *previous);
      const double ns = C.norm(sec);
      if (ns > 0.0) d = C.scaled(sec, 1.0 / ns);
    }
    std::optional<std::pair<Z, int>> next;
    while (!next) {
      next = C.correct(C.axpy(z, ds, d), d);
      if (next) break;
      ds *= 0.5;
      if (ds < options.ds_min) {
        branch.truncated = true;
        std::ostringstream os;
        os << "StepFailure: corrector failed with ds < " << options.ds_min << " at Dv = " << z.Dv;
        branch.note = os.str();
        return branch;
      }
    }
    const Z znew = next->first;
    const int iters = next->second;
    const double step_len = C.norm(C.diff(znew, z));
    auto tn = C.tangent(znew, d);
    if (!tn) {
      branch.truncated = true;
      branch.note = "StepFailure: singular bordered system";
      return branch;
    }

    if ((tn->Dv > 0.0) != (t.Dv > 0.0)) {
      // fold between z and znew: bisect on the arclength along the chord
      const Z chord = C.scaled(C.diff(znew, z), 1.0 / step_len);
      double s_lo = 0.0, s_hi = step_len;
      const bool sign_lo = t.Dv > 0.0;
      Z best = znew;
      double best_s = step_len;
      while (s_hi - s_lo > options.fold_tol) {
        const double s_mid = 0.5 * (s_lo + s_hi);
        auto zm = C.correct(C.axpy(z, s_mid, chord), chord);
        if (!zm) break;
        auto tm = C.tangent(zm->first, chord);
        if (!tm) break;
        if ((tm->Dv > 0.0) == sign_lo) {
          s_lo = s_mid;
        } else {
          s_hi = s_mid;
          best = zm->first;
          best_s = s_mid;
        }
      }
      branch.points.push_back(C.make_point(best, arclength + best_s, true));
    }

    arclength += step_len;
    previous = z;
    z = znew;
    t = *tn;
    if (z.Dv < lo - margin || z.Dv > hi + margin) break;
    branch.points.push_back(C.make_point(z, arclength, false));

    if (iters <= 3) ds = std::min(1.5 * ds, options.ds_max);
    if (iters >= 6) ds = std::max(0.7 * ds, options.ds_min);
  }
  return branch;
}

}  // namespace gm3
