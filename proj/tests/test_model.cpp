#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "gm3/errors.hpp"
#include "gm3/model.hpp"

using namespace gm3;

TEST_SUITE("model") {

TEST_CASE("reaction terms vanish at the homogeneous state") {
  Draw draw(11);
  for (int k = 0; k < 100; ++k) {
    ModelParams p;
    p.a = draw.log_uniform(1e-3, 10.0);
    p.b = draw.log_uniform(1e-3, 10.0);
    p.c = draw.log_uniform(1e-3, 10.0);
    const auto f = reaction_terms(homogeneous_state(p, 4), p);
    const double u = p.a + p.b * p.c;
    CHECK(f.u.cwiseAbs().maxCoeff() <= 1e-13 * u);
    CHECK(f.v.cwiseAbs().maxCoeff() <= 1e-13 * u * u);
    CHECK(f.w.cwiseAbs().maxCoeff() <= 1e-13 * u);
  }
}

TEST_CASE("activator balance on the outer slow manifold") {
  ModelParams p;
  p.a = 0.5;
  p.c = 2.0;
  for (double u : {0.6, 0.8, 1.0, 3.0}) {
    FieldTriple s = FieldTriple::constant(1, u, p.c * u * u / (u - p.a), u / p.c);
    CHECK(reaction_terms(s, p).u(0) == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("vanishing cubic") {
  ModelParams p;
  p.a = 0.7;
  p.b = 2.0;
  p.c = 3.0;
  const auto f = reaction_terms(FieldTriple::constant(1, 0.0, 1.0, 1.0), p);
  CHECK(f.u(0) == 0.7);
  CHECK(f.v(0) == -2.0);
  CHECK(f.w(0) == -3.0);
}

TEST_CASE("degenerate denominator is an error") {
  ModelParams p;
  auto s = FieldTriple::constant(3, 1.0, 1.0, 1.0);
  s.v(1) = 0.0;
  try {
    reaction_terms(s, p);
    FAIL("expected DegenerateDenominator");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateDenominator);
  }
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK(p.delta2() == p.delta1 * p.delta1);
  p.delta2_override = 0.5;
  CHECK(p.delta2() == 0.5);
  p.b = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.b = 1.0;
  p.Dv = 0.0;
  CHECK_THROWS_AS(ModelParams::checked(p), Error);
}

TEST_CASE("Laplacian of a constant and of x^2") {
  const Grid1D g = Grid1D::full(1.0, 201);
  CHECK(laplacian_neumann(Eigen::VectorXd::Constant(201, 3.7), g.h()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd q = g.x().array().square();
  const Eigen::VectorXd lq = laplacian_neumann(q, g.h());
  CHECK((lq.segment(1, 199).array() - 2.0).abs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(laplacian_neumann(Eigen::VectorXd::Ones(2), 0.1), Error);
}

TEST_CASE("Laplacian converges at second order on Neumann modes") {
  const double l = 1.0;
  std::vector<double> errs;
  for (int n : {101, 201, 401, 801}) {
    const Grid1D g = Grid1D::full(l, n);
    for (int k : {1, 3}) {
      const double kk = k * M_PI / (2.0 * l);
      const Eigen::VectorXd f = (kk * (g.x().array() + l)).cos();
      const Eigen::VectorXd err = laplacian_neumann(f, g.h()) + kk * kk * f;
      if (k == 3) errs.push_back(err.cwiseAbs().maxCoeff());
    }
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double order = std::log2(errs[i - 1] / errs[i]);
    CHECK(order > 1.9);
    CHECK(order < 2.1);
  }
}

TEST_CASE("twice-applied Laplacian keeps even data even") {
  Draw draw(5);
  const int n = 101;
  Eigen::VectorXd f(n);
  for (int i = 0; i <= n / 2; ++i) f(i) = f(n - 1 - i) = draw.uniform(0.0, 1.0);
  const Eigen::VectorXd l2 = laplacian_neumann(laplacian_neumann(f, 0.01), 0.01);
  for (int i = 0; i < n; ++i) CHECK(l2(i) == l2(n - 1 - i));
}

TEST_CASE("grids") {
  const Grid1D g = Grid1D::half(4.0, 5);
  CHECK(g.h() == 1.0);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 4.0);
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 2), Error);
}

}
