#include <doctest.h>

#include <cmath>

#include "fracpath/errors.hpp"
#include "fracpath/fractional.hpp"

using namespace fracpath;

TEST_CASE("sinc quadrature parameters match the closed form") {
  // h = 1/30, s = 0.5: kappa = 1/ln 30, n+ = n- = ceil(pi^2/(2 kappa^2))
  const QuadParams q = quadrature_params(1.0 / 30.0, 0.5);
  CHECK(q.kappa == doctest::Approx(0.2940143).epsilon(1e-6));
  CHECK(q.n_plus == 58);
  CHECK(q.n_minus == 58);
  CHECK(q.coeff == doctest::Approx(-q.kappa * std::sin(0.5 * M_PI) / M_PI));

  const QuadParams q2 = quadrature_params(0.04, 0.3);
  CHECK(q2.kappa == doctest::Approx(0.3106675).epsilon(1e-6));
  CHECK(q2.n_plus == 37);
  CHECK(q2.n_minus == 86);
}

TEST_CASE("quadrature parameter guards") {
  CHECK_THROWS_AS(quadrature_params(0.1, 0.0), InvalidFraction);
  CHECK_THROWS_AS(quadrature_params(0.1, 1.0), InvalidFraction);
  CHECK_THROWS_AS(quadrature_params(0.1, 1.2), InvalidFraction);
  CHECK_THROWS_AS(quadrature_params(1.5, 0.5), InvalidMesh);
  CHECK_THROWS_WITH_AS(quadrature_params(0.1, -0.5), "s must lie in (0,1)",
                       InvalidFraction);
}

TEST_CASE("scalar sinc power approximates lambda^s") {
  CHECK(scalar_sinc_power(1.0, 0.01, 0.5) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(scalar_sinc_power(4.0, 0.005, 0.25) ==
        doctest::Approx(std::pow(4.0, 0.25)).epsilon(1e-4));
  CHECK(scalar_sinc_power(0.0, 0.01, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("spectral mapping: Ks acts as -lambda^s on discrete eigenvectors") {
  const FemOps fem = assemble_fem(make_mesh(0.0, 1.0, 41), Bc::dirichlet);
  const double s = 0.5;
  const FracOperator op(fem, s);

  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(fem.stiffness, fem.mass);
  REQUIRE(es.info() == Eigen::Success);
  const double h = fem.mesh.h();
  for (int j = 0; j < 5; ++j) {
    const double lam = es.eigenvalues()[j];
    const Vec v = es.eigenvectors().col(j);
    const Vec lhs = op.apply(v);
    const Vec rhs = -scalar_sinc_power(lam, h, s) * v;
    const double scale = lhs.lpNorm<Eigen::Infinity>();
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-12 * scale);
  }
}

TEST_CASE("per-level and per-column builds agree to near roundoff") {
  for (int np : {51, 101}) {
    const FemOps fem = assemble_fem(make_mesh(0.0, 1.0, np), Bc::dirichlet);
    const FracOperator a(fem, 0.4, BuildOrder::per_level);
    const FracOperator b(fem, 0.4, BuildOrder::per_column);
    const double scale = a.matrix().cwiseAbs().maxCoeff();
    CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= 1e-13 * scale);
  }
}

TEST_CASE("mass-weighted operator is symmetric and semidefinite") {
  const FemOps fem = assemble_fem(make_mesh(-1.0, 2.0, 61), Bc::neumann);
  const FracOperator op(fem, 0.7);
  const Mat mks = fem.mass * op.matrix();
  const double scale = mks.cwiseAbs().maxCoeff();
  CHECK((mks - mks.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * scale);

  // -M Ks is positive semidefinite: smallest eigenvalue above -tol
  const Mat sym = -0.5 * (mks + mks.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8 * scale);
}

TEST_CASE("Neumann operator annihilates constants") {
  const FemOps fem = assemble_fem(make_mesh(0.0, 3.0, 41), Bc::neumann);
  const FracOperator op(fem, 0.6);
  const Vec ones = Vec::Ones(fem.dim());
  CHECK((op.matrix() * ones).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("matrix-free application matches the assembled operator") {
  const FemOps fem = assemble_fem(make_mesh(0.0, 1.0, 33), Bc::dirichlet);
  const double s = 0.3;
  const FracOperator op(fem, s);
  Vec u(fem.dim());
  for (int i = 0; i < u.size(); ++i) u[i] = std::cos(0.9 * i);
  const Vec a = op.apply(u);
  const Vec b = apply_balakrishnan(fem, s, u);
  CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-12 * a.lpNorm<Eigen::Infinity>());
}

TEST_CASE("eigenvalue convergence study shrinks the error at second order") {
  const ConvergenceReport rep =
      eigen_convergence_report(0.5, Bc::neumann, {30, 60, 120}, 5);
  REQUIRE(rep.err.size() == 3);
  CHECK(rep.err[0] > rep.err[1]);
  CHECK(rep.err[1] > rep.err[2]);
  CHECK(rep.slope > 1.5);
  CHECK(rep.slope < 2.5);

  CHECK_THROWS_AS(eigen_convergence_report(0.5, Bc::neumann, {10}, 40),
                  InvalidParameter);
}

TEST_CASE("fractional Poisson requires Dirichlet conditions") {
  const FemOps neu = assemble_fem(make_mesh(0.0, 1.0, 21), Bc::neumann);
  const FracOperator op(neu, 0.5);
  CHECK_THROWS_AS(solve_fractional_poisson(op, [](double) { return 1.0; }),
                  WrongBc);
}

TEST_CASE("integer-order Poisson with linear load is nodally exact") {
  // -u'' = 6x + 2, u(0) = u(1) = 0 has u(x) = -x(x-1)(x+2)
  const FemOps fem = assemble_fem(make_mesh(0.0, 1.0, 250), Bc::dirichlet);
  const Vec u = solve_poisson_integer(fem, [](double x) { return 6.0 * x + 2.0; });
  const Vec x = fem.mesh.nodes();
  double worst = 0.0;
  const Vec full = fem.prolong(u);
  for (int i = 0; i < x.size(); ++i) {
    const double exact = -x[i] * (x[i] - 1.0) * (x[i] + 2.0);
    worst = std::max(worst, std::abs(full[i] - exact));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("fractional Poisson self-convergence at s = 0.75") {
  const PoissonReport rep = poisson_convergence_report(0.75, {31, 62, 125}, 250);
  REQUIRE(rep.err.size() == 3);
  CHECK(rep.err[0] > rep.err[2]);
  CHECK(rep.slope > 1.5);
}
