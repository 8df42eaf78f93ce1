#include <doctest.h>

#include <cmath>

#include "fracpath/errors.hpp"
#include "fracpath/mesh_fem.hpp"

using namespace fracpath;

TEST_CASE("make_mesh validates its arguments") {
  CHECK_THROWS_AS(make_mesh(1.0, 0.0, 10), InvalidMesh);
  CHECK_THROWS_AS(make_mesh(0.0, 0.0, 10), InvalidMesh);
  CHECK_THROWS_AS(make_mesh(0.0, 1.0, 2), InvalidMesh);
  const Mesh m = make_mesh(-5.0, 5.0, 101);
  CHECK(m.np == 101);
  CHECK(m.h() == doctest::Approx(0.1));
  CHECK(m.length() == doctest::Approx(10.0));
}

TEST_CASE("mesh nodes hit both endpoints exactly") {
  const Mesh m = make_mesh(-2.5, 7.5, 41);
  const Vec x = m.nodes();
  CHECK(x.size() == 41);
  CHECK(x[0] == -2.5);
  CHECK(x[40] == 7.5);
  for (int i = 1; i < 41; ++i)
    CHECK(x[i] - x[i - 1] == doctest::Approx(m.h()).epsilon(1e-13));
}

TEST_CASE("P1 matrices have the textbook invariants") {
  const Mesh mesh = make_mesh(0.0, 1.0, 17);
  const FemOps neu = assemble_fem(mesh, Bc::neumann);
  const FemOps dir = assemble_fem(mesh, Bc::dirichlet);

  CHECK(neu.dim() == 17);
  CHECK(dir.dim() == 15);

  // total mass equals the domain length
  CHECK(neu.mass.sum() == doctest::Approx(1.0).epsilon(1e-13));
  // stiffness annihilates constants under Neumann
  const Vec ones = Vec::Ones(17);
  CHECK((neu.stiffness * ones).lpNorm<Eigen::Infinity>() == 0.0);
  // symmetry
  CHECK((neu.mass - neu.mass.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((dir.stiffness - dir.stiffness.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  // Dirichlet stiffness is positive definite
  Eigen::LLT<Mat> llt(dir.stiffness);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("prolong and restrict are inverse on active dofs") {
  const Mesh mesh = make_mesh(0.0, 2.0, 11);
  const FemOps dir = assemble_fem(mesh, Bc::dirichlet);
  Vec u(9);
  for (int i = 0; i < 9; ++i) u[i] = std::sin(1.0 + i);
  const Vec full = dir.prolong(u);
  CHECK(full.size() == 11);
  CHECK(full[0] == 0.0);
  CHECK(full[10] == 0.0);
  CHECK((dir.restrict_active(full) - u).lpNorm<Eigen::Infinity>() == 0.0);

  const FemOps neu = assemble_fem(mesh, Bc::neumann);
  Vec v(11);
  v.setLinSpaced(11, 0.0, 1.0);
  CHECK((neu.prolong(v) - v).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("normalized norms of simple profiles") {
  const Mesh mesh = make_mesh(0.0, 1.0, 801);
  const FemOps neu = assemble_fem(mesh, Bc::neumann);
  const Vec c = Vec::Constant(801, 3.0);
  CHECK(norm_lp(neu, c, 2) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(norm_lp(neu, c, 8) == doctest::Approx(3.0).epsilon(1e-12));

  // ((1/1) int sin(pi x)^2)^{1/2} = sqrt(1/2)
  const Vec x = mesh.nodes();
  Vec s(801);
  for (int i = 0; i < 801; ++i) s[i] = std::sin(M_PI * x[i]);
  CHECK(norm_lp(neu, s, 2) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-5));

  // unnormalized variant scales with the domain length
  const Mesh wide = make_mesh(0.0, 4.0, 801);
  const FemOps wneu = assemble_fem(wide, Bc::neumann);
  const Vec cw = Vec::Constant(801, 3.0);
  CHECK(norm_lp(wneu, cw, 2, false) == doctest::Approx(6.0).epsilon(1e-12));

  CHECK_THROWS_AS(norm_lp(neu, c, 3), UnsupportedNorm);
}

TEST_CASE("Dirichlet norm uses the zero-extended profile") {
  const Mesh mesh = make_mesh(0.0, 1.0, 11);
  const FemOps dir = assemble_fem(mesh, Bc::dirichlet);
  const Vec u = Vec::Ones(9);
  // trapezoid with halved first/last interior contributions
  const double expect = std::sqrt(0.9);
  CHECK(norm_lp(dir, u, 2) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("Laplace eigenvalues") {
  CHECK(laplace_eigenvalue(1.0, 1) == doctest::Approx(M_PI * M_PI));
  CHECK(laplace_eigenvalue(10.0, 2) == doctest::Approx(4.0 * M_PI * M_PI / 100.0));
  CHECK_THROWS_AS(laplace_eigenvalue(1.0, 0), InvalidParameter);
}
