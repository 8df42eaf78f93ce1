#pragma once

#include <functional>
#include <vector>

#include "fracpath/linalg.hpp"
#include "fracpath/mesh_fem.hpp"

namespace fracpath {

/// Sinc quadrature parameters for the Balakrishnan integral,
/// kappa = 1/|log h|, truncation indices proportional to 1/kappa^2.
struct QuadParams {
  double kappa = 0.0;
  int n_plus = 0;
  int n_minus = 0;
  double coeff = 0.0;  // -kappa * sin(s pi) / pi
};

/// Throws InvalidFraction unless s lies in (0,1); requires h in (0,1).
QuadParams quadrature_params(double h, double s);

/// Scalar sinc-quadrature approximation of lambda^s for lambda >= 0.
double scalar_sinc_power(double lambda, double h, double s);

enum class BuildOrder {
  per_level,   // factor each shifted matrix once, solve all stiffness columns
  per_column,  // column-by-column, inner loop over quadrature levels
};

/// Dense discretization of the spectral fractional Laplacian. The matrix
/// acts on active dofs and approximates Delta^s (negative semidefinite in
/// the mass inner product).
class FracOperator {
 public:
  FracOperator(FemOps fem, double s, BuildOrder order = BuildOrder::per_level);

  const FemOps& fem() const { return fem_; }
  const Mat& matrix() const { return ks_; }
  double s() const { return s_; }
  const QuadParams& quad() const { return quad_; }
  Vec apply(const Vec& u) const { return ks_ * u; }

 private:
  FemOps fem_;
  double s_;
  QuadParams quad_;
  Mat ks_;
};

/// Matrix-free action of the quadrature sum on a single vector; factorizes
/// each shifted matrix on the fly.
Vec apply_balakrishnan(const FemOps& fem, double s, const Vec& u);

struct ConvergenceReport {
  std::vector<int> np;
  std::vector<double> h;
  std::vector<double> err;  // max relative eigenvalue error over j = 1..n_e
  double slope = 0.0;
  double s = 0.0;
  Bc bc = Bc::neumann;
};

/// Eigenvalue convergence study on (0,1): discrete pencil eigenvalues of
/// (-M Ks, M) against (j pi)^{2s} for j = 1..n_e.
ConvergenceReport eigen_convergence_report(double s, Bc bc,
                                           const std::vector<int>& np_list, int n_e);

/// Solve (-Delta)^s u = f on the operator's Dirichlet mesh.
Vec solve_fractional_poisson(const FracOperator& op,
                             const std::function<double(double)>& f);

/// Standard P1 Poisson solve (s = 1 reference path).
Vec solve_poisson_integer(const FemOps& fem, const std::function<double(double)>& f);

struct PoissonReport {
  std::vector<int> np;
  std::vector<double> h;
  std::vector<double> err;  // relative L2 error against the reference mesh
  double slope = 0.0;
  double s = 0.0;
  int ref_np = 0;
};

/// Self-convergence of the fractional Poisson solve on (0,1) with
/// f(x) = 6x + 2 against a fine-mesh in-run reference.
PoissonReport poisson_convergence_report(double s, const std::vector<int>& np_list,
                                         int ref_np);

}  // namespace fracpath
