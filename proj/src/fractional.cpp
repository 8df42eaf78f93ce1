#include "fracpath/fractional.hpp"

#include <cmath>
#include <memory>

namespace fracpath {

QuadParams quadrature_params(double h, double s) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidFraction("s must lie in (0,1)");
  if (!(h > 0.0 && h < 1.0)) throw InvalidMesh("quadrature requires mesh size in (0,1)");
  QuadParams q;
  q.kappa = 1.0 / std::abs(std::log(h));
  const double pi2 = M_PI * M_PI;
  q.n_plus = static_cast<int>(std::ceil(pi2 / (4.0 * (1.0 - s) * q.kappa * q.kappa)));
  q.n_minus = static_cast<int>(std::ceil(pi2 / (4.0 * s * q.kappa * q.kappa)));
  q.coeff = -q.kappa * std::sin(s * M_PI) / M_PI;
  if (q.kappa * q.n_plus > 700.0 || q.kappa * q.n_minus > 700.0)
    throw InvalidFraction("quadrature range overflows for this (h, s) pair");
  return q;
}

double scalar_sinc_power(double lambda, double h, double s) {
  if (lambda < 0.0) throw InvalidParameter("scalar_sinc_power requires lambda >= 0");
  const QuadParams q = quadrature_params(h, s);
  double acc = 0.0;
  for (int l = -q.n_minus; l <= q.n_plus; ++l) {
    const double t = std::exp(q.kappa * l);
    acc += std::exp(q.kappa * l * s) * (lambda / (t + lambda));
  }
  return -q.coeff * acc;
}

namespace {

// Solver for one shifted matrix e^{kappa l} M + K: Cholesky while well
// conditioned, minimum-norm least squares once the shift no longer lifts
// the stiffness kernel.
class LevelSolver {
 public:
  LevelSolver(const Mat& m, const Mat& k, double t, double norm_ratio) {
    Mat a = t * m + k;
    if (t >= 1e-12 * norm_ratio) {
      try {
        auto chol = std::make_unique<SpdFactor>(a);
        if (chol->rcond() >= 1e-13) {
          chol_ = std::move(chol);
          return;
        }
      } catch (const SingularMatrix&) {
      }
    }
    minnorm_ = std::make_unique<MinNormSolver>(a);
  }

  Vec solve(const Vec& rhs) const {
    return chol_ ? chol_->solve(rhs) : minnorm_->solve(rhs);
  }

  // Column-at-a-time arithmetic below the blocking cutoff so that build
  // orders stay bitwise comparable there.
  Mat solve_many(const Mat& rhs) const {
    const bool columnwise = rhs.rows() <= 256;
    if (chol_) return columnwise ? chol_->solve_columnwise(rhs) : chol_->solve(rhs);
    return columnwise ? minnorm_->solve_columnwise(rhs) : minnorm_->solve(rhs);
  }

 private:
  std::unique_ptr<SpdFactor> chol_;
  std::unique_ptr<MinNormSolver> minnorm_;
};

double inf_norm(const Mat& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

FracOperator::FracOperator(FemOps fem, double s, BuildOrder order)
    : fem_(std::move(fem)), s_(s), quad_(quadrature_params(fem_.mesh.h(), s)) {
  const Mat& m = fem_.mass;
  const Mat& k = fem_.stiffness;
  const int n = fem_.dim();
  const double ratio = inf_norm(k) / inf_norm(m);

  ks_ = Mat::Zero(n, n);
  if (order == BuildOrder::per_level) {
    for (int l = -quad_.n_minus; l <= quad_.n_plus; ++l) {
      const double t = std::exp(quad_.kappa * l);
      const LevelSolver solver(m, k, t, ratio);
      const double w = quad_.coeff * std::exp(quad_.kappa * l * s_);
      ks_ += w * solver.solve_many(k);
    }
    return;
  }

  // Algorithm-1 ordering: outer loop over stiffness columns, inner loop over
  // quadrature levels. Factorizations depend on l only and are hoisted; the
  // per-entry summation order matches the per-level build.
  std::vector<LevelSolver> solvers;
  std::vector<double> weights;
  solvers.reserve(quad_.n_minus + quad_.n_plus + 1);
  for (int l = -quad_.n_minus; l <= quad_.n_plus; ++l) {
    const double t = std::exp(quad_.kappa * l);
    solvers.emplace_back(m, k, t, ratio);
    weights.push_back(quad_.coeff * std::exp(quad_.kappa * l * s_));
  }
  for (int i = 0; i < n; ++i) {
    const Vec z = k.col(i);
    Vec col = Vec::Zero(n);
    for (size_t li = 0; li < solvers.size(); ++li)
      col += weights[li] * solvers[li].solve(z);
    ks_.col(i) = col;
  }
}

Vec apply_balakrishnan(const FemOps& fem, double s, const Vec& u) {
  const QuadParams q = quadrature_params(fem.mesh.h(), s);
  const Mat& m = fem.mass;
  const Mat& k = fem.stiffness;
  const double ratio = inf_norm(k) / inf_norm(m);
  const Vec z = k * u;
  Vec acc = Vec::Zero(fem.dim());
  for (int l = -q.n_minus; l <= q.n_plus; ++l) {
    const double t = std::exp(q.kappa * l);
    const LevelSolver solver(m, k, t, ratio);
    acc += (q.coeff * std::exp(q.kappa * l * s)) * solver.solve(z);
  }
  return acc;
}

ConvergenceReport eigen_convergence_report(double s, Bc bc,
                                           const std::vector<int>& np_list, int n_e) {
  ConvergenceReport rep;
  rep.s = s;
  rep.bc = bc;
  for (const int np : np_list) {
    const FemOps fe = assemble_fem(make_mesh(0.0, 1.0, np), bc);
    if (n_e > fe.dim() - 1)
      throw InvalidParameter("eigen_convergence_report: n_e exceeds active dof count");
    const FracOperator op(fe, s);
    const Mat neg_mks = -(fe.mass * op.matrix());
    const Mat a_sym = 0.5 * (neg_mks + neg_mks.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a_sym, fe.mass);
    if (es.info() != Eigen::Success)
      throw EigFailure("eigen_convergence_report: eigensolve failed");
    const Vec& lam = es.eigenvalues();  // ascending
    const int skip = (bc == Bc::neumann) ? 1 : 0;
    double emax = 0.0;
    for (int j = 1; j <= n_e; ++j) {
      const double exact = std::pow(laplace_eigenvalue(1.0, j), s);
      const double approx = lam[skip + j - 1];
      emax = std::max(emax, std::abs(approx - exact) / exact);
    }
    rep.np.push_back(np);
    rep.h.push_back(fe.mesh.h());
    rep.err.push_back(emax);
  }
  rep.slope = fit_loglog_slope(rep.h, rep.err);
  return rep;
}

Vec solve_fractional_poisson(const FracOperator& op,
                             const std::function<double(double)>& f) {
  if (op.fem().bc != Bc::dirichlet)
    throw WrongBc("fractional Poisson solve expects Dirichlet conditions");
  const Vec nodes = op.fem().restrict_active(op.fem().mesh.nodes());
  Vec rhs(nodes.size());
  for (Eigen::Index i = 0; i < nodes.size(); ++i) rhs[i] = f(nodes[i]);
  const Mat a = -op.matrix();
  Eigen::PartialPivLU<Mat> lu(a);
  const Vec u = lu.solve(rhs);
  if (!u.allFinite()) throw SingularMatrix("fractional Poisson solve failed");
  return u;
}

Vec solve_poisson_integer(const FemOps& fem, const std::function<double(double)>& f) {
  if (fem.bc != Bc::dirichlet)
    throw WrongBc("Poisson solve expects Dirichlet conditions");
  const Vec nodes = fem.restrict_active(fem.mesh.nodes());
  Vec fv(nodes.size());
  for (Eigen::Index i = 0; i < nodes.size(); ++i) fv[i] = f(nodes[i]);
  const SpdFactor factor(fem.stiffness);
  return factor.solve(Vec(fem.mass * fv));
}

namespace {

// Piecewise-linear interpolation of (mesh_src, u_full_src) at x.
double interp1(const Mesh& mesh, const Vec& u_full, double x) {
  const double h = mesh.h();
  int e = static_cast<int>(std::floor((x - mesh.a) / h));
  e = std::max(0, std::min(mesh.np - 2, e));
  const double x0 = mesh.a + e * h;
  const double t = (x - x0) / h;
  return u_full[e] * (1.0 - t) + u_full[e + 1] * t;
}

}  // namespace

PoissonReport poisson_convergence_report(double s, const std::vector<int>& np_list,
                                         int ref_np) {
  const auto f = [](double x) { return 6.0 * x + 2.0; };
  PoissonReport rep;
  rep.s = s;
  rep.ref_np = ref_np;

  const FemOps fe_ref = assemble_fem(make_mesh(0.0, 1.0, ref_np), Bc::dirichlet);
  const FracOperator op_ref(fe_ref, s);
  const Vec u_ref_full = fe_ref.prolong(solve_fractional_poisson(op_ref, f));

  for (const int np : np_list) {
    const FemOps fe = assemble_fem(make_mesh(0.0, 1.0, np), Bc::dirichlet);
    const FracOperator op(fe, s);
    const Vec u = solve_fractional_poisson(op, f);
    const Vec nodes = fe.mesh.nodes();
    Vec ref_on_coarse(fe.dim());
    for (int i = 0; i < fe.dim(); ++i)
      ref_on_coarse[i] = interp1(fe_ref.mesh, u_ref_full, nodes[i + 1]);
    const double num = norm_lp(fe, Vec(u - ref_on_coarse), 2);
    const double den = norm_lp(fe, ref_on_coarse, 2);
    rep.np.push_back(np);
    rep.h.push_back(fe.mesh.h());
    rep.err.push_back(num / den);
  }
  rep.slope = fit_loglog_slope(rep.h, rep.err);
  return rep;
}

}  // namespace fracpath
