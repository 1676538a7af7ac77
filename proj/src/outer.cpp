#include "gm3/outer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "gm3/errors.hpp"
#include "gm3/profile.hpp"
#include "gm3/quadrature.hpp"
#include "gm3/roots.hpp"

namespace gm3 {

namespace {

constexpr double kPoleTol = 1e-12;
constexpr double kChiTol = 1e-13;
constexpr double kGammaMargin = 1e-10;

void require_off_pole(double u, const ModelParams& p) {
  if (std::abs(u - p.a) < kPoleTol) {
    std::ostringstream os;
    os << "u = " << u << " is within " << kPoleTol << " of the background a = " << p.a;
    throw Error(ErrorKind::PoleAtBackground, os.str());
  }
}

void require_chi_range(double mu, double u0p, const ModelParams& p) {
  if (!(u0p > p.a && u0p <= mu && mu <= 2.0 * p.a * (1.0 + 1e-15))) {
    std::ostringstream os;
    os << "chi needs a < u0p <= mu <= 2a; got a = " << p.a << ", u0p = " << u0p
       << ", mu = " << mu;
    throw Error(ErrorKind::OutOfRange, os.str());
  }
}

double sqrt_gdiff(double hi, double lo, const ModelParams& p) {
  return std::sqrt(std::max(G_difference(hi, lo, p), 0.0));
}

// 2 int_{lo}^{mu} sqrt(G(mu) - G(xi)) R'(xi)/R(xi)^2 dxi with xi = mu - t^2.
double chi_integral(double lo, double mu, double t_min, const ModelParams& p) {
  const double t_max = std::sqrt(mu - lo);
  auto integrand = [&](double t) {
    const double xi = mu - t * t;
    const double r = R_of(xi, p);
    return 2.0 * t * sqrt_gdiff(mu, xi, p) * R_prime(xi, p) / (r * r);
  };
  return 2.0 * integrate_gk15(integrand, t_min, t_max, kChiTol, kChiTol, 4000).value;
}

double u0p_of(double V0, const ModelParams& p, double* gamma_out = nullptr) {
  const double gamma = gamma_of(p.a, p.c, p.delta1, V0, kGammaMargin);
  if (gamma_out) *gamma_out = gamma;
  return V0 * gamma / (p.c * p.sqrt_delta1());
}

double smallest_admissible_V0(const ModelParams& p) {
  return 4.0 * p.a * p.c * p.sqrt_delta1() / (1.0 - 2.0 * kGammaMargin);
}

bool admissible(double V0, double mu, const ModelParams& p) {
  if (!(V0 > smallest_admissible_V0(p)) || !(mu > p.a) || !(mu <= 2.0 * p.a)) return false;
  return u0p_of(V0, p) < mu;
}

}  // namespace

double R_of(double u, const ModelParams& p) {
  require_off_pole(u, p);
  return u * u - p.b * p.c * u * u / (u - p.a);
}

double f_of(double u, const ModelParams& p) {
  require_off_pole(u, p);
  const double s = u - p.a;
  return p.c * u * (2.0 * p.a - u) / (s * s);
}

double R_prime(double u, const ModelParams& p) { return 2.0 * u + p.b * f_of(u, p); }

double G_of(double xi, const ModelParams& p) {
  require_off_pole(xi, p);
  if (!(xi > p.a)) throw Error(ErrorKind::OutOfRange, "G needs xi > a");
  const double a = p.a, bc = p.b * p.c;
  const double s = xi - a;
  const double a3 = a * a * a, a4 = a3 * a;
  return p.c * (s * s * s / 3.0 + 0.5 * (2.0 * a - bc) * s * s - 2.0 * a * bc * s -
                2.0 * a3 * std::log(s) + (a4 - 2.0 * a3 * bc) / s - a4 * bc / (2.0 * s * s));
}

double G_difference(double hi, double lo, const ModelParams& p) {
  require_off_pole(hi, p);
  require_off_pole(lo, p);
  if (!(hi > p.a) || !(lo > p.a)) throw Error(ErrorKind::OutOfRange, "G needs xi > a");
  const double a = p.a, bc = p.b * p.c;
  const double a3 = a * a * a, a4 = a3 * a;
  const double s1 = hi - a, s2 = lo - a;
  const double d = hi - lo;
  const double sum = s1 + s2;
  const double terms = d * (s1 * s1 + s1 * s2 + s2 * s2) / 3.0 + 0.5 * (2.0 * a - bc) * d * sum -
                       2.0 * a * bc * d - 2.0 * a3 * std::log1p(d / s2) -
                       (a4 - 2.0 * a3 * bc) * d / (s1 * s2) +
                       0.5 * a4 * bc * d * sum / (s1 * s1 * s2 * s2);
  return p.c * terms;
}

double chi_of(double mu, double u0p, const ModelParams& p) {
  require_chi_range(mu, u0p, p);
  if (mu == u0p) return 0.0;
  const double boundary = -2.0 * sqrt_gdiff(mu, u0p, p) / R_of(u0p, p);
  return boundary + chi_integral(u0p, mu, 0.0, p);
}

double chi_partial(double u, double mu, double u0p, const ModelParams& p) {
  require_chi_range(mu, u0p, p);
  if (!(u >= u0p && u <= mu)) throw Error(ErrorKind::OutOfRange, "chi_partial needs u0p <= u <= mu");
  if (u == u0p) return 0.0;
  const double upper = u < mu ? 2.0 * sqrt_gdiff(mu, u, p) / R_of(u, p) : 0.0;
  const double lower = -2.0 * sqrt_gdiff(mu, u0p, p) / R_of(u0p, p);
  return upper + lower + chi_integral(u0p, mu, std::sqrt(mu - u), p);
}

double chi_improper(double mu, double u0p, const ModelParams& p) {
  require_chi_range(mu, u0p, p);
  auto integrand = [&](double t) {
    const double xi = mu - t * t;
    return 2.0 * t * f_of(xi, p) / sqrt_gdiff(mu, xi, p);
  };
  return integrate_gk15(integrand, 0.0, std::sqrt(mu - u0p), 1e-12, 1e-12, 4000).value;
}

std::array<double, 2> outer_residuals(double V0, double mu, double Dv, const ModelParams& p) {
  double gamma = 0.0;
  const double u0p = u0p_of(V0, p, &gamma);
  require_chi_range(mu, u0p, p);
  const double flux = 3.0 * V0 * V0 * std::sqrt(1.0 - 2.0 * gamma) /
                      (std::sqrt(2.0 * p.delta1) * std::sqrt(Dv) * p.c * p.c);
  return {flux - sqrt_gdiff(mu, u0p, p), chi_of(mu, u0p, p) - std::sqrt(2.0 / Dv) * p.l};
}

NucleationResult nucleation_threshold(const ModelParams& p, bool expect_nucleation) {
  p.validate();
  NucleationResult out;
  if (p.a <= 0.0) {
    if (expect_nucleation) throw Error(ErrorKind::RegimeMismatch, "nucleation needs a > 0");
    return out;
  }
  if (p.b * p.c <= p.a) {
    if (expect_nucleation) {
      throw Error(ErrorKind::RegimeMismatch,
                  "bc <= a: homogeneous background a+bc lies below 2a, no saddle-node");
    }
    return out;
  }
  const double mu = 2.0 * p.a;
  // Eliminating Dv = 2 l^2 / chi(2a)^2 leaves one equation in V0.
  auto residual = [&](double V0) {
    double gamma = 0.0;
    const double u0p = u0p_of(V0, p, &gamma);
    const double chi = chi_of(mu, u0p, p);
    return 3.0 * V0 * V0 * std::sqrt(1.0 - 2.0 * gamma) * chi /
               (2.0 * p.sqrt_delta1() * p.l * p.c * p.c) -
           sqrt_gdiff(mu, u0p, p);
  };

  const double v_lo = smallest_admissible_V0(p) * (1.0 + 1e-6);
  const double v_hi =
      std::max(100.0 * v_lo, 10.0 * std::sqrt(p.b) * p.c * p.c * std::max(1.0, std::sqrt(p.l)));
  const int samples = 400;
  const double ratio = std::pow(v_hi / v_lo, 1.0 / samples);
  double prev_v = v_lo;
  double prev_r = residual(prev_v);
  for (int k = 1; k <= samples; ++k) {
    const double v = v_lo * std::pow(ratio, k);
    const double r = residual(v);
    if (prev_r < 0.0 && r >= 0.0) {
      const double V0 = brent_root(residual, prev_v, v, 1e-15 * v);
      out.regime = Regime::Nucleating;
      out.V0 = V0;
      out.u0p = u0p_of(V0, p);
      out.chi_max = chi_of(mu, out.u0p, p);
      out.D_nuc = 2.0 * p.l * p.l / (out.chi_max * out.chi_max);
      return out;
    }
    prev_v = v;
    prev_r = r;
  }
  throw Error(ErrorKind::NewtonDiverged, "no threshold root found for V0 at mu = 2a");
}

OuterSolve solve_V0_mu(const ModelParams& p, std::optional<std::pair<double, double>> initial_guess,
                       double newton_tol, int max_iter) {
  p.validate();
  if (!(p.b * p.c > p.a) || p.a <= 0.0) {
    throw Error(ErrorKind::RegimeMismatch, "the coupled outer solve needs bc > a > 0");
  }
  Eigen::Vector2d x;
  if (initial_guess) {
    x << initial_guess->first, initial_guess->second;
  } else {
    const double k = std::sqrt(p.b / p.Dv);
    x << std::sqrt(p.b * p.Dv) * p.c * p.c / 3.0 * std::tanh(k * p.l), 1.5 * p.a;
  }
  if (!admissible(x(0), x(1), p)) {
    std::ostringstream os;
    os << "initial guess (V0, mu) = (" << x(0) << ", " << x(1) << ") is not admissible";
    throw Error(ErrorKind::OutOfRange, os.str());
  }
  auto eval = [&](const Eigen::Vector2d& z) {
    const auto r = outer_residuals(z(0), z(1), p.Dv, p);
    return Eigen::Vector2d(r[0], r[1]);
  };

  OuterSolve out;
  Eigen::Vector2d F = eval(x);
  std::ostringstream trace;
  for (int iter = 0; iter <= max_iter; ++iter) {
    trace << "iter " << iter << ": V0=" << x(0) << " mu=" << x(1) << " |F|=" << F.cwiseAbs().maxCoeff()
          << "\n";
    if (F.cwiseAbs().maxCoeff() < newton_tol) {
      out.V0 = x(0);
      out.mu = x(1);
      out.u0p = u0p_of(x(0), p, &out.gamma);
      out.chi_of_mu = chi_of(out.mu, out.u0p, p);
      out.converged = true;
      out.residuals = {F(0), F(1)};
      out.iterations = iter;
      return out;
    }
    if (iter == max_iter) break;

    Eigen::Matrix2d J;
    const double hv = 1e-7 * x(0);
    J.col(0) = (eval(Eigen::Vector2d(x(0) + hv, x(1))) - F) / hv;
    double hm = 1e-7 * x(1);
    if (x(1) + hm > 2.0 * p.a || u0p_of(x(0), p) >= x(1) - hm) {
      hm = (x(1) + hm > 2.0 * p.a) ? -hm : hm;
    }
    J.col(1) = (eval(Eigen::Vector2d(x(0), x(1) + hm)) - F) / hm;
    const Eigen::Vector2d step = J.partialPivLu().solve(-F);

    double alpha = 1.0;
    bool accepted = false;
    bool any_admissible = false;
    for (int k = 0; k < 30; ++k, alpha *= 0.5) {
      const Eigen::Vector2d trial = x + alpha * step;
      if (!admissible(trial(0), trial(1), p)) continue;
      any_admissible = true;
      const Eigen::Vector2d Ft = eval(trial);
      if (Ft.norm() < (1.0 - 1e-4 * alpha) * F.norm()) {
        x = trial;
        F = Ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(any_admissible ? ErrorKind::NewtonDiverged : ErrorKind::OutOfRange,
                  "line search failed\n" + trace.str());
    }
  }
  throw Error(ErrorKind::NewtonDiverged, "iteration limit reached\n" + trace.str());
}

Eigen::VectorXd outer_u_profile(const Eigen::Ref<const Eigen::VectorXd>& x, const OuterSolve& solve,
                                const ModelParams& p) {
  if (!solve.converged) throw Error(ErrorKind::InvalidParameter, "outer solve did not converge");
  const double mu = solve.mu, u0p = solve.u0p;
  const double scale = std::sqrt(2.0 / p.Dv);

  // Table of (chi, u) on xi = mu - t^2, then cubic Hermite inversion with
  // du/dchi = sqrt(G(mu) - G(u)) / f(u).
  const int nodes = 1200;
  const double t_max = std::sqrt(mu - u0p);
  std::vector<double> us(nodes + 1), chis(nodes + 1), slopes(nodes + 1);
  double integral = 0.0;
  const double lower = -2.0 * sqrt_gdiff(mu, u0p, p) / R_of(u0p, p);
  for (int k = nodes; k >= 0; --k) {
    const double t = t_max * static_cast<double>(k) / nodes;
    const double u = k == nodes ? u0p : mu - t * t;
    if (k < nodes) {
      const double t_prev = t_max * static_cast<double>(k + 1) / nodes;
      auto integrand = [&](double s) {
        const double xi = mu - s * s;
        const double r = R_of(xi, p);
        return 2.0 * s * sqrt_gdiff(mu, xi, p) * R_prime(xi, p) / (r * r);
      };
      integral += integrate_gk15(integrand, t, t_prev, kChiTol, kChiTol).value;
    }
    const double upper = k > 0 ? 2.0 * sqrt_gdiff(mu, u, p) / R_of(u, p) : 0.0;
    const int idx = nodes - k;
    us[idx] = u;
    chis[idx] = k == nodes ? 0.0 : upper + lower + 2.0 * integral;
    slopes[idx] = u < mu ? sqrt_gdiff(mu, u, p) / f_of(u, p) : 0.0;
  }
  if (mu == 2.0 * p.a) slopes[nodes] = 0.0;

  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double target = scale * std::min(std::abs(x(i)), p.l);
    if (target <= 0.0) {
      out(i) = u0p;
      continue;
    }
    if (target >= chis[nodes]) {
      out(i) = mu;
      continue;
    }
    const auto it = std::upper_bound(chis.begin(), chis.end(), target);
    const std::size_t j = static_cast<std::size_t>(it - chis.begin()) - 1;
    const double c0 = chis[j], c1 = chis[j + 1];
    const double dc = c1 - c0;
    const double s = (target - c0) / dc;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    out(i) = h00 * us[j] + h10 * dc * slopes[j] + h01 * us[j + 1] + h11 * dc * slopes[j + 1];
  }
  return out;
}

namespace {

std::array<double, 3> matching_quadratic(const ModelParams& p, double plateau_source) {
  const double k = std::sqrt(p.b / p.Dv);
  const double T = std::tanh(k * p.l);
  const double B = 3.0 * p.a * p.c * p.sqrt_delta1() + std::sqrt(p.b * p.Dv) * p.c * p.c * T;
  const double C = std::sqrt(p.Dv / p.b) * plateau_source * plateau_source * p.c * p.c *
                   p.sqrt_delta1() * T;
  return {3.0, -B, C};
}

std::pair<double, double> real_roots(const std::array<double, 3>& q) {
  const double disc = q[1] * q[1] - 4.0 * q[0] * q[2];
  if (disc < 0.0) {
    std::ostringstream os;
    os << "V0 quadratic has complex roots (discriminant " << disc << ")";
    throw Error(ErrorKind::ComplexRoots, os.str());
  }
  const auto r = quadratic_roots(q[0], q[1], q[2]);
  return {r[0].real(), r[1].real()};
}

}  // namespace

SmallARoots smalla_roots(const ModelParams& p) {
  p.validate();
  SmallARoots out;
  out.coefficients = matching_quadratic(p, p.a);
  std::tie(out.V0_plus, out.V0_minus) = real_roots(out.coefficients);
  const double k = std::sqrt(p.b / p.Dv);
  out.V0_plus_asymptotic = std::sqrt(p.b * p.Dv) * p.c * p.c / 3.0 * std::tanh(k * p.l);
  out.V0_minus_asymptotic = p.sqrt_delta1() * p.a * p.a / p.b;
  return out;
}

HomogeneousRoots homog_roots(const ModelParams& p) {
  p.validate();
  HomogeneousRoots out;
  out.coefficients = matching_quadratic(p, p.a + p.b * p.c);
  std::tie(out.V0_plus, out.V0_minus) = real_roots(out.coefficients);
  out.v0_plus = out.V0_plus / p.sqrt_delta1();
  out.v0_minus = out.V0_minus / p.sqrt_delta1();
  return out;
}

namespace {

double plateau(const ModelParams& p, Background background) {
  const double u = background == Background::SmallA ? p.a : p.a + p.b * p.c;
  return u * u / p.b;
}

}  // namespace

double v_outer_profile(double x, double V0, const ModelParams& p, Background background) {
  const double k = std::sqrt(p.b / p.Dv);
  const double r = std::min(std::abs(x), p.l);
  // cosh(k(l - r)) / cosh(k l) without overflow
  const double ratio = std::exp(-k * r) * (1.0 + std::exp(-2.0 * k * (p.l - r))) /
                       (1.0 + std::exp(-2.0 * k * p.l));
  const double P = plateau(p, background);
  return P + (V0 / p.sqrt_delta1() - P) * ratio;
}

double v_outer_derivative(double x, double V0, const ModelParams& p, Background background) {
  const double k = std::sqrt(p.b / p.Dv);
  const double r = std::min(std::abs(x), p.l);
  const double dratio = -k * std::exp(-k * r) * (1.0 - std::exp(-2.0 * k * (p.l - r))) /
                        (1.0 + std::exp(-2.0 * k * p.l));
  const double P = plateau(p, background);
  return (x < 0.0 ? -1.0 : 1.0) * (V0 / p.sqrt_delta1() - P) * dratio;
}

}  // namespace gm3
