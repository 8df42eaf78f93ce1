#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fracpath/fractional.hpp"

namespace fracpath {

/// Steady-state residual form of a reaction-diffusion model:
/// dyn_mass * du/dt = -G(u; mu). States stack the components, each of size
/// n_active.
class Model {
 public:
  explicit Model(std::shared_ptr<const FracOperator> op);
  virtual ~Model() = default;

  const FracOperator& frac() const { return *op_; }
  const FemOps& fem() const { return op_->fem(); }
  int n_active() const { return op_->fem().dim(); }
  int dim() const { return components() * n_active(); }

  virtual std::string name() const = 0;
  virtual int components() const = 0;
  virtual Vec residual(const Vec& u, double mu) const = 0;
  virtual Mat jacobian_u(const Vec& u, double mu) const = 0;
  virtual Vec jacobian_mu(const Vec& u, double mu) const = 0;
  virtual Vec homogeneous_state(double mu) const = 0;
  /// Formula values of the branch points on the homogeneous state,
  /// (mode index j, mu_j); modes without a real positive value are omitted.
  virtual std::vector<std::pair<int, double>> predicted_branch_points(int jmax) const = 0;
  /// Dynamic mass matrix of the evolution problem (dense, dim x dim).
  virtual Mat dyn_mass() const = 0;
  /// Pencil (A, B) whose finite eigenvalues are the growth rates of the
  /// linearization; algebraic blocks are eliminated, B is SPD.
  virtual void stability_pencil(const Vec& u, double mu, Mat& a, Mat& b) const = 0;

  /// View of component c of a stacked state.
  Vec component(const Vec& u, int c) const;

 protected:
  std::shared_ptr<const FracOperator> op_;
  Mat mks_;  // mass * Ks
};

std::unique_ptr<Model> make_allen_cahn(std::shared_ptr<const FracOperator> op,
                                       double gamma);
std::unique_ptr<Model> make_swift_hohenberg(std::shared_ptr<const FracOperator> op,
                                            double nu);
std::unique_ptr<Model> make_schnakenberg(std::shared_ptr<const FracOperator> op,
                                         double d, double sigma);

double schnak_critical_wavenumber(double s);  // (sqrt(2)-1)^{1/(2s)}
double schnak_critical_mu(double d);          // sqrt(d (3 - sqrt(8)))
/// Domain (-m pi / k_c, m pi / k_c) tuned so the critical mode fits m periods.
Mesh schnak_tuned_mesh(int m, double s, int np);

/// Linear-theory kernel shape of mode j on the active dofs: sin under
/// Dirichlet, cos under Neumann.
Vec predicted_kernel(const FemOps& fem, int j);

/// Number of interior sign changes, used to identify kernel modes.
int count_sign_changes(const Vec& v);

}  // namespace fracpath
