#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "gm3/errors.hpp"
#include "gm3/nlep.hpp"
#include "gm3/outer.hpp"
#include "gm3/profile.hpp"
#include "gm3/roots.hpp"

using namespace gm3;

namespace {

const LineOperator& op20() {
  static const LineOperator op(4001, 20.0);
  return op;
}

ModelParams small_a() {
  ModelParams p;
  p.a = 0.01;
  p.b = 1.0;
  p.c = 1.0;
  p.l = 1.0;
  p.Dv = 1.0;
  p.delta1 = 1e-4;
  return p;
}

}  // namespace

TEST_SUITE("nlep") {

TEST_CASE("f at the origin and on the real axis") {
  const auto& op = op20();
  CHECK(std::abs(f_lambda(0.0, op) - 6.0) < 1e-6);
  CHECK(f_lambda(1.249, op).real() > 0.0);
  CHECK(f_lambda(1.251, op).real() < 0.0);
  CHECK(f_lambda(2.0, op).real() < 0.0);
  CHECK(std::abs(f_lambda(50.0, op)) < 0.5);
  for (double lam : {0.2, 0.6, 1.0}) CHECK(f_lambda(lam + 1e-3, op).real() > f_lambda(lam, op).real());
}

TEST_CASE("g reduces to f") {
  const auto& op = op20();
  for (cdouble lam : {cdouble(0.3, 0.0), cdouble(0.5, 0.8), cdouble(2.0, -1.0)}) {
    CHECK(std::abs(g_lambda(lam, 1.0, 0.0, op) - f_lambda(lam, op)) < 1e-10);
  }
  for (double tau : {0.5, 3.0, 40.0}) {
    for (double c : {0.5, 2.0}) CHECK(std::abs(g_lambda(0.0, c, tau, op) - 6.0) < 1e-6);
  }
}

TEST_CASE("f and g satisfy the Cauchy-Riemann equations") {
  const auto& op = op20();
  Draw draw(17);
  const double h = 1e-5;
  for (int k = 0; k < 10; ++k) {
    const cdouble lam(draw.uniform(-0.5, 3.0), draw.uniform(0.1, 2.0));
    for (int which = 0; which < 2; ++which) {
      const auto F = [&](cdouble z) { return which == 0 ? f_lambda(z, op) : g_lambda(z, 0.5, 2.0, op); };
      const cdouble dx = (F(lam + h) - F(lam - h)) / (2.0 * h);
      const cdouble dy = (F(lam + cdouble(0, h)) - F(lam - cdouble(0, h))) / (2.0 * h);
      CHECK(std::abs(dx + cdouble(0, 1) * dy) < 1e-5 * std::max(1.0, std::abs(dx)));
    }
  }
}

TEST_CASE("spectrum of the local operator") {
  const auto& op = op20();
  const auto top = top_eigenvalues(op, 2.0, 2);
  CHECK(std::abs(top[0] - 1.25) < 1e-3);
  CHECK(std::abs(top[1]) < 1e-3);
  const Eigen::VectorXd phi = eigenvector(op, 2.0, top[1]);
  Eigen::VectorXd wy(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) wy(i) = wc_derivative(op.coarse().y(i), 0.0);
  CHECK(std::abs(phi.dot(wy)) / (phi.norm() * wy.norm()) > 0.999);
}

TEST_CASE("multiplier") {
  auto p = small_a();
  const double V0p = smalla_roots(p).V0_plus_asymptotic;
  CHECK(A_multiplier(0.0, 0.0, p, V0p).real() == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(A_upper(0.0, 0.0, p) - 3.0) < 1e-14);
  const cdouble lam(0.3, 0.7);
  p.l = 50.0;
  CHECK(std::abs(A_upper(lam, 2.0, p) - 3.0 * std::sqrt(1.0 + 2.0 * lam)) < 1e-12);
  CHECK(std::abs(A_multiplier(lam, 2.0, p, smalla_roots(p).V0_plus_asymptotic) - A_upper(lam, 2.0, p)) <
        1e-12);
}

TEST_CASE("branch verdicts") {
  const auto p = small_a();
  const auto r = smalla_roots(p);
  CHECK(classify_branch(r.V0_plus_asymptotic, p) == Verdict::Stable);
  CHECK(classify_branch(r.V0_minus, p) == Verdict::Unstable);
  CHECK(A_multiplier(0.0, 0.0, p, r.V0_minus).real() > 100.0);
  CHECK(classify_branch(r.V0_plus_asymptotic / 2.0, p) == Verdict::Neutral);
}

TEST_CASE("amplitude Hopf threshold") {
  const auto& op = op20();
  const auto p = small_a();
  const auto r = hopf_theta(p, op);
  CHECK(r.verdict == Verdict::Hopf);
  CHECK(std::abs(r.threshold / 1.34 - 1.0) < 0.05);
  CHECK(r.omega > 0.0);
  const cdouble lam(0.0, r.omega);
  CHECK(std::abs(f_lambda(lam, op) - A_upper(lam, r.threshold, p)) < 1e-8);

  auto q = p;
  q.l = 20.0;
  CHECK(std::abs(hopf_theta(q, op).threshold / q.b - 2.7492) < 1e-2);
  q.l = 1.0;
  q.Dv = 0.01;
  CHECK(std::abs(hopf_theta(q, op).threshold / q.b - 2.7492) < 1e-2);
}

TEST_CASE("theta_h curve follows Dv") {
  const auto& op = op20();
  const auto curve = hopf_theta_curve(small_a(), {0.25, 0.5, 1.0, 2.0}, op);
  REQUIRE(curve.size() == 4);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].threshold < curve[i - 1].threshold);
}

TEST_CASE("large-eigenvalue Hopf threshold in tau") {
  const auto& op = op20();
  auto p = small_a();
  const auto r = hopf_tau_large(p, op);
  CHECK(std::abs(r.threshold / 6.05 - 1.0) < 0.05);
  CHECK(std::abs(g_lambda(cdouble(0.0, r.omega), p.c, r.threshold, op) - 3.0) < 1e-8);
  p.c = 2.0;
  CHECK(hopf_tau_large(p, op).threshold == doctest::Approx(2.0 * r.threshold).epsilon(1e-6));
}

TEST_CASE("truncation length barely matters") {
  const LineOperator wide(8001, 40.0);
  const auto& op = op20();
  CHECK(std::abs(f_lambda(0.0, wide) - f_lambda(0.0, op)) < 1e-6);
  const auto p = small_a();
  CHECK(std::abs(hopf_theta(p, wide).threshold - hopf_theta(p, op).threshold) < 1e-4);
  CHECK(std::abs(hopf_tau_large(p, wide).threshold - hopf_tau_large(p, op).threshold) < 1e-4);
  CHECK_THROWS_AS(LineOperator(4001, 10.0), Error);
}

TEST_CASE("principal eigenvalue of L_lambda") {
  CHECK(std::abs(lambda0_root(0.0, 1.0) - 1.25) < 1e-10);
  const double inf_root = (29.0 - std::sqrt(73.0)) / 8.0;
  CHECK(std::abs(lambda0_root(1e6, 1.0) - inf_root) < 1e-4);
  CHECK(std::abs(lambda0_root(1e6, 1.0) / 2.56 - 1.0) < 0.01);
  double prev = 0.0;
  for (double tau = 0.0; tau <= 100.0; tau += 0.5) {
    const double l0 = lambda0_root(tau, 1.0);
    CHECK(l0 >= prev);
    CHECK(l0 < inf_root);
    prev = l0;
  }
  CHECK_THROWS_AS(lambda0_root(-1.0, 1.0), Error);
}

TEST_CASE("principal eigenvalue is a fixed point of the discrete operator") {
  const auto& op = op20();
  for (double tau : {0.0, 1.0, 3.0, 30.0}) {
    const double c = 1.0;
    const double l0 = lambda0_root(tau, c);
    const double kappa = 2.0 + tau * l0 / (c + tau * l0);
    CHECK(std::abs(top_eigenvalues(op, kappa, 1)[0] - l0) < 1e-3);
  }
}

TEST_CASE("g blows up at the principal eigenvalue") {
  const auto& op = op20();
  const double c = 0.5, target = 2.43;
  const double tau = brent_root([&](double t) { return lambda0_root(t, c) - target; }, 0.01, 1e4, 1e-12);
  const double l0 = lambda0_root(tau, c);
  CHECK(l0 == doctest::Approx(target).epsilon(1e-9));
  CHECK(g_lambda(l0 - 1e-3, c, tau, op).real() > 0.0);
  CHECK(g_lambda(l0 + 1e-3, c, tau, op).real() < 0.0);
}

}
