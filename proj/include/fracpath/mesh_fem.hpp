#pragma once

#include <Eigen/Dense>

#include "fracpath/errors.hpp"

namespace fracpath {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

enum class Bc { dirichlet, neumann };

/// Uniform 1D mesh on [a, b] with np nodes (np - 1 elements).
struct Mesh {
  double a = 0.0;
  double b = 1.0;
  int np = 2;

  double length() const { return b - a; }
  double h() const { return (b - a) / (np - 1); }
  /// Node coordinates, exact at both ends.
  Vec nodes() const;
};

/// Throws InvalidMesh unless a < b and np >= 3.
Mesh make_mesh(double a, double b, int np);

/// P1 mass and stiffness matrices on a uniform mesh. Under Dirichlet
/// conditions the boundary rows/columns are eliminated, so the active
/// dimension is np - 2; under Neumann it is np.
struct FemOps {
  Mesh mesh;
  Bc bc = Bc::neumann;
  Mat mass;
  Mat stiffness;

  int dim() const { return static_cast<int>(mass.rows()); }

  /// Active dof vector -> full nodal vector (inserts boundary zeros
  /// under Dirichlet; identity under Neumann).
  Vec prolong(const Vec& u) const;
  /// Full nodal vector -> active dof vector.
  Vec restrict_active(const Vec& full) const;
};

FemOps assemble_fem(const Mesh& mesh, Bc bc);

/// Normalized L^p norm of a P1 function given by active dofs:
/// ((1/|Omega|) \int |u|^p)^{1/p}, trapezoidal quadrature on the prolonged
/// vector. Only p = 2 and p = 8 are supported.
double norm_lp(const FemOps& fe, const Vec& u, int p, bool normalized = true);

/// Exact eigenvalues of -Laplace on (0, L): Dirichlet sin(j pi x / L),
/// Neumann cos(j pi x / L), both with eigenvalue (j pi / L)^2.
double laplace_eigenvalue(double length, int j);

}  // namespace fracpath
