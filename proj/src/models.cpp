#include "fracpath/models.hpp"

#include <cmath>

#include "fracpath/errors.hpp"

namespace fracpath {

namespace {

// M * diag(v), the Galerkin weighting of a nodal multiplier.
Mat mass_diag(const Mat& m, const Vec& v) {
  return m.array().rowwise() * v.transpose().array();
}

}  // namespace

Model::Model(std::shared_ptr<const FracOperator> op) : op_(std::move(op)) {
  if (!op_) throw InvalidParameter("model requires a fractional operator");
  mks_ = op_->fem().mass * op_->matrix();
}

Vec Model::component(const Vec& u, int c) const {
  const int n = n_active();
  if (u.size() != dim()) throw InvalidParameter("state size does not match model dimension");
  if (c < 0 || c >= components()) throw InvalidParameter("component index out of range");
  return u.segment(c * n, n);
}

// ---------------------------------------------------------------------------
// Allen-Cahn: u_t = Ks u + mu u + u^3 - gamma u^5, Dirichlet.

class AllenCahn final : public Model {
 public:
  AllenCahn(std::shared_ptr<const FracOperator> op, double gamma)
      : Model(std::move(op)), gamma_(gamma) {
    if (fem().bc != Bc::dirichlet)
      throw WrongBc("Allen-Cahn requires Dirichlet boundary conditions");
  }

  std::string name() const override { return "allen_cahn"; }
  int components() const override { return 1; }

  Vec residual(const Vec& u, double mu) const override {
    const Vec r = mu * u.array() + u.array().cube() -
                  gamma_ * u.array().pow(5);
    return -(mks_ * u) - fem().mass * r;
  }

  Mat jacobian_u(const Vec& u, double mu) const override {
    const Vec rp = mu + 3.0 * u.array().square() -
                   5.0 * gamma_ * u.array().pow(4);
    return -mks_ - mass_diag(fem().mass, rp);
  }

  Vec jacobian_mu(const Vec& u, double /*mu*/) const override {
    return -(fem().mass * u);
  }

  Vec homogeneous_state(double /*mu*/) const override {
    return Vec::Zero(dim());
  }

  std::vector<std::pair<int, double>> predicted_branch_points(int jmax) const override {
    std::vector<std::pair<int, double>> out;
    const double len = fem().mesh.length();
    for (int j = 1; j <= jmax; ++j)
      out.emplace_back(j, std::pow(laplace_eigenvalue(len, j), frac().s()));
    return out;
  }

  Mat dyn_mass() const override { return fem().mass; }

  void stability_pencil(const Vec& u, double mu, Mat& a, Mat& b) const override {
    a = -jacobian_u(u, mu);
    b = fem().mass;
  }

 private:
  double gamma_;
};

// ---------------------------------------------------------------------------
// Swift-Hohenberg via the (u, v = Ks u) splitting, Dirichlet:
//   u_t = -(1 + Ks)^2 u + mu u + nu u^3 - u^5
// with components stacked (u1, u2) and the algebraic constraint u2 = Ks u1.

class SwiftHohenberg final : public Model {
 public:
  SwiftHohenberg(std::shared_ptr<const FracOperator> op, double nu)
      : Model(std::move(op)), nu_(nu) {
    if (fem().bc != Bc::dirichlet)
      throw WrongBc("Swift-Hohenberg requires Dirichlet boundary conditions");
    // Schur factor of the eliminated constraint, reused by every
    // stability call: (M Ks + 2 M) Ks.
    schur_ = (mks_ + 2.0 * fem().mass) * frac().matrix();
  }

  std::string name() const override { return "swift_hohenberg"; }
  int components() const override { return 2; }

  Vec residual(const Vec& u, double mu) const override {
    const int n = n_active();
    const auto u1 = u.head(n);
    const auto u2 = u.tail(n);
    const Vec r = 2.0 * u2.array() + (1.0 - mu) * u1.array() -
                  nu_ * u1.array().cube() + u1.array().pow(5);
    Vec g(dim());
    g.head(n) = mks_ * u2 + fem().mass * r;
    g.tail(n) = -(mks_ * u1) + fem().mass * u2;
    return g;
  }

  Mat jacobian_u(const Vec& u, double mu) const override {
    const int n = n_active();
    const auto u1 = u.head(n);
    const Vec d1 = (1.0 - mu) - 3.0 * nu_ * u1.array().square() +
                   5.0 * u1.array().pow(4);
    Mat gu(dim(), dim());
    gu.topLeftCorner(n, n) = mass_diag(fem().mass, d1);
    gu.topRightCorner(n, n) = mks_ + 2.0 * fem().mass;
    gu.bottomLeftCorner(n, n) = -mks_;
    gu.bottomRightCorner(n, n) = fem().mass;
    return gu;
  }

  Vec jacobian_mu(const Vec& u, double /*mu*/) const override {
    const int n = n_active();
    Vec gmu = Vec::Zero(dim());
    gmu.head(n) = -(fem().mass * u.head(n));
    return gmu;
  }

  Vec homogeneous_state(double /*mu*/) const override {
    return Vec::Zero(dim());
  }

  std::vector<std::pair<int, double>> predicted_branch_points(int jmax) const override {
    std::vector<std::pair<int, double>> out;
    const double len = fem().mesh.length();
    const double s = frac().s();
    for (int j = 1; j <= jmax; ++j) {
      const double k2s = std::pow(laplace_eigenvalue(len, j), s);
      const double t = 1.0 - k2s;
      out.emplace_back(j, t * t);
    }
    return out;
  }

  Mat dyn_mass() const override {
    const int n = n_active();
    Mat b = Mat::Zero(dim(), dim());
    b.topLeftCorner(n, n) = fem().mass;
    return b;
  }

  // The algebraic second block is eliminated: with v2 = Ks v1 the growth
  // rates solve (-M diag(d1) - (M Ks + 2 M) Ks) v1 = lambda M v1.
  void stability_pencil(const Vec& u, double mu, Mat& a, Mat& b) const override {
    const int n = n_active();
    const auto u1 = u.head(n);
    const Vec d1 = (1.0 - mu) - 3.0 * nu_ * u1.array().square() +
                   5.0 * u1.array().pow(4);
    a = -mass_diag(fem().mass, d1) - schur_;
    b = fem().mass;
  }

 private:
  double nu_;
  Mat schur_;
};

// ---------------------------------------------------------------------------
// Schnakenberg with cross-kinetics, Neumann:
//   u_t = Ks u + F1,  v_t = d Ks v + F2,
//   F1 = -u + u^2 v + sigma (u - 1/v)^2,  F2 = mu - u^2 v - sigma (u - 1/v)^2.

class Schnakenberg final : public Model {
 public:
  Schnakenberg(std::shared_ptr<const FracOperator> op, double d, double sigma)
      : Model(std::move(op)), d_(d), sigma_(sigma) {
    if (fem().bc != Bc::neumann)
      throw WrongBc("Schnakenberg requires Neumann boundary conditions");
    if (d_ <= 0.0) throw InvalidParameter("diffusion ratio d must be positive");
  }

  std::string name() const override { return "schnakenberg"; }
  int components() const override { return 2; }

  Vec residual(const Vec& u, double mu) const override {
    const int n = n_active();
    const auto u1 = u.head(n);
    const auto u2 = u.tail(n);
    check_domain(u2);
    const Vec w = u1.array() - u2.array().inverse();
    const Vec uuv = u1.array().square() * u2.array();
    const Vec f1 = -u1.array() + uuv.array() + sigma_ * w.array().square();
    const Vec f2 = mu - uuv.array() - sigma_ * w.array().square();
    Vec g(dim());
    g.head(n) = -(mks_ * u1) - fem().mass * f1;
    g.tail(n) = -d_ * (mks_ * u2) - fem().mass * f2;
    return g;
  }

  Mat jacobian_u(const Vec& u, double mu) const override {
    (void)mu;
    const int n = n_active();
    const auto u1 = u.head(n);
    const auto u2 = u.tail(n);
    check_domain(u2);
    const Vec w = u1.array() - u2.array().inverse();
    const Vec dw2_du1 = 2.0 * sigma_ * w.array();
    const Vec dw2_du2 = 2.0 * sigma_ * w.array() * u2.array().square().inverse();
    const Vec f1_u1 = -1.0 + 2.0 * u1.array() * u2.array() + dw2_du1.array();
    const Vec f1_u2 = u1.array().square() + dw2_du2.array();
    const Vec f2_u1 = -2.0 * u1.array() * u2.array() - dw2_du1.array();
    const Vec f2_u2 = -u1.array().square() - dw2_du2.array();
    Mat gu(dim(), dim());
    gu.topLeftCorner(n, n) = -mks_ - mass_diag(fem().mass, f1_u1);
    gu.topRightCorner(n, n) = -mass_diag(fem().mass, f1_u2);
    gu.bottomLeftCorner(n, n) = -mass_diag(fem().mass, f2_u1);
    gu.bottomRightCorner(n, n) = -d_ * mks_ - mass_diag(fem().mass, f2_u2);
    return gu;
  }

  Vec jacobian_mu(const Vec& /*u*/, double /*mu*/) const override {
    const int n = n_active();
    Vec gmu = Vec::Zero(dim());
    gmu.tail(n) = -(fem().mass * Vec::Ones(n));
    return gmu;
  }

  Vec homogeneous_state(double mu) const override {
    if (mu <= 0.0)
      throw InvalidParameter("Schnakenberg homogeneous state needs mu > 0");
    const int n = n_active();
    Vec u(dim());
    u.head(n).setConstant(mu);
    u.tail(n).setConstant(1.0 / mu);
    return u;
  }

  std::vector<std::pair<int, double>> predicted_branch_points(int jmax) const override {
    std::vector<std::pair<int, double>> out;
    const double len = fem().mesh.length();
    const double s = frac().s();
    for (int j = 1; j <= jmax; ++j) {
      const double k2s = std::pow(laplace_eigenvalue(len, j), s);
      if (k2s >= 1.0) continue;  // no Turing balance beyond k^{2s} = 1
      const double mu = std::sqrt(k2s) *
                        std::sqrt(d_ * (1.0 - k2s) / (1.0 + k2s));
      out.emplace_back(j, mu);
    }
    return out;
  }

  Mat dyn_mass() const override {
    const int n = n_active();
    Mat b = Mat::Zero(dim(), dim());
    b.topLeftCorner(n, n) = fem().mass;
    b.bottomRightCorner(n, n) = fem().mass;
    return b;
  }

  void stability_pencil(const Vec& u, double mu, Mat& a, Mat& b) const override {
    a = -jacobian_u(u, mu);
    b = dyn_mass();
  }

 private:
  void check_domain(const Eigen::Ref<const Vec>& u2) const {
    if (u2.minCoeff() <= 1e-8)
      throw DomainError("Schnakenberg state left the domain u2 > 0");
  }

  double d_;
  double sigma_;
};

// ---------------------------------------------------------------------------

std::unique_ptr<Model> make_allen_cahn(std::shared_ptr<const FracOperator> op,
                                       double gamma) {
  return std::make_unique<AllenCahn>(std::move(op), gamma);
}

std::unique_ptr<Model> make_swift_hohenberg(std::shared_ptr<const FracOperator> op,
                                            double nu) {
  return std::make_unique<SwiftHohenberg>(std::move(op), nu);
}

std::unique_ptr<Model> make_schnakenberg(std::shared_ptr<const FracOperator> op,
                                         double d, double sigma) {
  return std::make_unique<Schnakenberg>(std::move(op), d, sigma);
}

double schnak_critical_wavenumber(double s) {
  if (s <= 0.0 || s >= 1.0) throw InvalidFraction("s must lie in (0, 1)");
  return std::pow(std::sqrt(2.0) - 1.0, 1.0 / (2.0 * s));
}

double schnak_critical_mu(double d) {
  if (d <= 0.0) throw InvalidParameter("diffusion ratio d must be positive");
  return std::sqrt(d * (3.0 - std::sqrt(8.0)));
}

Mesh schnak_tuned_mesh(int m, double s, int np) {
  if (m < 1) throw InvalidParameter("period count m must be at least 1");
  const double half = m * M_PI / schnak_critical_wavenumber(s);
  return make_mesh(-half, half, np);
}

Vec predicted_kernel(const FemOps& fem, int j) {
  if (j < 1) throw InvalidParameter("mode index must be at least 1");
  const Vec x = fem.mesh.nodes();
  const double a = fem.mesh.a;
  const double len = fem.mesh.length();
  Vec full(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double t = j * M_PI * (x[i] - a) / len;
    full[i] = fem.bc == Bc::dirichlet ? std::sin(t) : std::cos(t);
  }
  return fem.restrict_active(full);
}

int count_sign_changes(const Vec& v) {
  const double tol = 1e-8 * v.cwiseAbs().maxCoeff();
  int changes = 0;
  double prev = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) <= tol) continue;
    if (prev != 0.0 && v[i] * prev < 0.0) ++changes;
    prev = v[i];
  }
  return changes;
}

}  // namespace fracpath
