#include "gm3/nlep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "gm3/errors.hpp"
#include "gm3/profile.hpp"
#include "gm3/quadrature.hpp"

namespace gm3 {

namespace {

constexpr double kSingularCond = 1e12;

LineOperator::Level make_level(Eigen::Index n, double Ly, double gamma) {
  LineOperator::Level level;
  level.y = Eigen::VectorXd::LinSpaced(n, -Ly, Ly);
  level.h = 2.0 * Ly / static_cast<double>(n - 1);
  level.w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) level.w(i) = wc_eval(level.y(i), gamma);
  level.w2 = level.w.cwiseProduct(level.w);
  return level;
}

cdouble level_integral(const LineOperator& op, const LineOperator::Level& level, cdouble kappa,
                       cdouble lambda) {
  const auto t = op.assemble<cdouble>(level, kappa, lambda);
  const Eigen::VectorXcd rhs = level.w2.cast<cdouble>();
  const Eigen::VectorXcd phi = solve_tridiagonal(t, rhs);
  const double cond = t.norm_inf() * phi.cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff();
  if (!phi.allFinite() || !(cond < kSingularCond)) {
    std::ostringstream os;
    os << "resolvent at lambda = " << lambda << " has condition estimate " << cond;
    throw Error(ErrorKind::NearSingularResolvent, os.str());
  }
  const Eigen::VectorXcd integrand = level.w.cast<cdouble>().cwiseProduct(phi);
  return simpson(integrand, level.h);
}

// Damped Newton on a complex residual F(omega, q) = 0 with a forward
// difference Jacobian.
struct HopfSolve {
  double omega, q, residual;
  int iterations;
  bool converged;
};

HopfSolve hopf_newton(const std::function<cdouble(double, double)>& F, double omega, double q,
                      double tol = 1e-10, int max_iter = 60) {
  cdouble r = F(omega, q);
  for (int iter = 0; iter < max_iter; ++iter) {
    if (std::abs(r) < tol) return {omega, q, std::abs(r), iter, true};
    const double dw = 1e-6 * std::max(std::abs(omega), 1e-3);
    const double dq = 1e-6 * std::max(std::abs(q), 1e-3);
    const cdouble rw = (F(omega + dw, q) - r) / dw;
    const cdouble rq = (F(omega, q + dq) - r) / dq;
    Eigen::Matrix2d J;
    J << rw.real(), rq.real(), rw.imag(), rq.imag();
    const Eigen::Vector2d step = J.partialPivLu().solve(Eigen::Vector2d(-r.real(), -r.imag()));
    if (!step.allFinite()) break;
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, alpha *= 0.5) {
      const double wn = omega + alpha * step(0);
      const double qn = q + alpha * step(1);
      if (!(wn > 0.0) || !(qn > 0.0)) continue;
      cdouble rn;
      try {
        rn = F(wn, qn);
      } catch (const Error&) {
        continue;
      }
      if (std::abs(rn) < (1.0 - 1e-4 * alpha) * std::abs(r)) {
        omega = wn;
        q = qn;
        r = rn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return {omega, q, std::abs(r), max_iter, std::abs(r) < tol};
}

SpectrumResult hopf_multistart(const std::function<cdouble(double, double)>& F,
                               std::pair<double, double> guess, const char* what) {
  std::vector<double> starts{guess.first};
  for (int k = 0; k <= 14; ++k) starts.push_back(0.2 + 0.2 * k);
  std::ostringstream trace;
  for (double w0 : starts) {
    HopfSolve s{};
    try {
      s = hopf_newton(F, w0, guess.second);
    } catch (const Error& e) {
      trace << "start omega=" << w0 << ": " << e.what() << "\n";
      continue;
    }
    if (s.converged) {
      SpectrumResult out;
      out.omega = s.omega;
      out.threshold = s.q;
      out.lambda = cdouble(0.0, s.omega);
      out.verdict = Verdict::Hopf;
      out.residual = s.residual;
      out.iterations = s.iterations;
      return out;
    }
    trace << "start omega=" << w0 << ": stalled at (" << s.omega << ", " << s.q
          << ") |F|=" << s.residual << "\n";
  }
  throw Error(ErrorKind::NewtonDiverged, std::string(what) + " not found\n" + trace.str());
}

}  // namespace

LineOperator::LineOperator(Eigen::Index n, double Ly, double gamma) : Ly_(Ly), gamma_(gamma) {
  if (n < 5) throw Error(ErrorKind::GridTooSmall, "line operator needs n >= 5");
  if (n % 2 == 0) ++n;
  if (!(Ly >= 20.0)) throw Error(ErrorKind::InvalidParameter, "truncation Ly must be >= 20");
  coarse_ = make_level(n, Ly, gamma);
  fine_ = make_level(2 * n - 1, Ly, gamma);
}

cdouble LineOperator::resolvent_integral(cdouble kappa, cdouble lambda) const {
  const cdouble c = level_integral(*this, coarse_, kappa, lambda);
  const cdouble f = level_integral(*this, fine_, kappa, lambda);
  return (4.0 * f - c) / 3.0;
}

cdouble f_lambda(cdouble lambda, const LineOperator& op) {
  return op.resolvent_integral(2.0, lambda);
}

cdouble g_lambda(cdouble lambda, double c, double tau, const LineOperator& op) {
  const cdouble kappa = 2.0 + tau * lambda / (c + tau * lambda);
  return op.resolvent_integral(kappa, lambda);
}

cdouble tanh_stable(cdouble z) {
  if (z.real() < 0.0) return -tanh_stable(-z);
  const cdouble e = std::exp(-2.0 * z);
  return (1.0 - e) / (1.0 + e);
}

cdouble A_multiplier(cdouble lambda, double theta, const ModelParams& p, double V0) {
  const cdouble s = std::sqrt(p.b + theta * lambda);
  return p.c * p.c * std::sqrt(p.Dv) * s * tanh_stable(s * p.l / std::sqrt(p.Dv)) / V0;
}

cdouble A_upper(cdouble lambda, double theta, const ModelParams& p) {
  const double kl = p.l * std::sqrt(p.b / p.Dv);
  const cdouble s = std::sqrt(1.0 + (theta / p.b) * lambda);
  return 3.0 * s * tanh_stable(kl * s) / std::tanh(kl);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "Stable";
    case Verdict::Unstable: return "Unstable";
    case Verdict::Neutral: return "Neutral";
    case Verdict::Hopf: return "Hopf";
  }
  return "Unknown";
}

Verdict classify_branch(double V0, const ModelParams& p) {
  const double A = A_multiplier(0.0, 0.0, p, V0).real();
  if (std::abs(A - 6.0) < 1e-8) return Verdict::Neutral;
  return A > 6.0 ? Verdict::Unstable : Verdict::Stable;
}

SpectrumResult hopf_theta(const ModelParams& p, const LineOperator& op,
                          std::pair<double, double> guess) {
  auto F = [&](double omega, double theta) {
    const cdouble lam(0.0, omega);
    return f_lambda(lam, op) - A_upper(lam, theta, p);
  };
  return hopf_multistart(F, guess, "theta_h");
}

std::vector<SpectrumResult> hopf_theta_curve(const ModelParams& p, const std::vector<double>& Dvs,
                                             const LineOperator& op) {
  std::vector<SpectrumResult> out;
  std::pair<double, double> guess{0.87, 2.75 * p.b};
  for (double Dv : Dvs) {
    ModelParams q = p;
    q.Dv = Dv;
    out.push_back(hopf_theta(q, op, guess));
    guess = {out.back().omega, out.back().threshold};
  }
  return out;
}

SpectrumResult hopf_tau_large(const ModelParams& p, const LineOperator& op,
                              std::pair<double, double> guess) {
  auto F = [&](double omega, double tau) {
    return g_lambda(cdouble(0.0, omega), p.c, tau, op) - 3.0;
  };
  return hopf_multistart(F, guess, "tau_lh");
}

double lambda0_root(double tau, double c) {
  if (!(tau >= 0.0) || !(c > 0.0)) throw Error(ErrorKind::InvalidParameter, "need tau >= 0, c > 0");
  auto F = [&](double lam) {
    return 4.0 + 3.0 * tau * lam / (c + tau * lam) - 2.0 * lam - std::sqrt(1.0 + lam);
  };
  double lo = 0.0, hi = 4.0;
  if (!(F(lo) > 0.0) || !(F(hi) < 0.0)) {
    throw Error(ErrorKind::NoRootInBracket, "lambda0 not bracketed by [0, 4]");
  }
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (F(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> top_eigenvalues(const LineOperator& op, double kappa, int count) {
  const auto t = op.assemble<double>(op.coarse(), kappa, 0.0);
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(symmetric_tridiagonal_eigenvalue(t.diag, t.upper, k));
  return out;
}

Eigen::VectorXd eigenvector(const LineOperator& op, double kappa, double eigenvalue) {
  const double shift = eigenvalue + 1e-10 * std::max(1.0, std::abs(eigenvalue));
  const auto t = op.assemble<double>(op.coarse(), kappa, shift);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(t.size());
  for (int it = 0; it < 3; ++it) {
    x = solve_tridiagonal(t, x);
    x.normalize();
  }
  return x;
}

}  // namespace gm3
