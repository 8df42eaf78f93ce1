#include "fracpath/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

namespace fracpath {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

SpdFactor::SpdFactor(const Mat& a) {
  llt_.compute(a);
  if (llt_.info() == Eigen::Success) {
    rcond_ = llt_.rcond();
  } else {
    indefinite_ = true;
    ldlt_.compute(a);
    if (ldlt_.info() != Eigen::Success)
      throw SingularMatrix("factor_spd: LDLT fallback failed");
    // LDLT tolerates exactly singular input; reject it via the pivots
    const Vec d = ldlt_.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax <= 0.0 ||
        d.cwiseAbs().minCoeff() <= static_cast<double>(a.rows()) * kEps * dmax)
      throw SingularMatrix("factor_spd: matrix is numerically singular");
    rcond_ = ldlt_.rcond();
  }
  if (!(rcond_ > 1e-15))
    throw SingularMatrix("factor_spd: condition estimate exceeds 1e15");
}

Vec SpdFactor::solve(const Vec& rhs) const {
  return indefinite_ ? Vec(ldlt_.solve(rhs)) : Vec(llt_.solve(rhs));
}

Mat SpdFactor::solve(const Mat& rhs) const {
  return indefinite_ ? Mat(ldlt_.solve(rhs)) : Mat(llt_.solve(rhs));
}

Mat SpdFactor::solve_columnwise(const Mat& rhs) const {
  Mat x(rhs.rows(), rhs.cols());
  for (Eigen::Index j = 0; j < rhs.cols(); ++j)
    x.col(j) = solve(Vec(rhs.col(j)));
  return x;
}

MinNormSolver::MinNormSolver(const Mat& a) {
  cod_.setThreshold(static_cast<double>(a.rows()) * kEps);
  cod_.compute(a);
}

Vec MinNormSolver::solve(const Vec& rhs) const { return cod_.solve(rhs); }

Mat MinNormSolver::solve(const Mat& rhs) const { return cod_.solve(rhs); }

Mat MinNormSolver::solve_columnwise(const Mat& rhs) const {
  Mat x(rhs.rows(), rhs.cols());
  for (Eigen::Index j = 0; j < rhs.cols(); ++j)
    x.col(j) = cod_.solve(Vec(rhs.col(j)));
  return x;
}

Vec minnorm_lstsq(const Mat& a, const Vec& b) {
  return MinNormSolver(a).solve(b);
}

namespace {

EigPairs take_pairs(const CVec& values, const CMat& vectors, int k, EigWhich which) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (which == EigWhich::smallest_magnitude) {
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
      return std::abs(values[i]) < std::abs(values[j]);
    });
  } else {
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
      return values[i].real() > values[j].real();
    });
  }
  const int m = std::min(k, n);
  EigPairs out;
  out.values.resize(m);
  out.vectors.resize(vectors.rows(), m);
  for (int i = 0; i < m; ++i) {
    out.values[i] = values[order[i]];
    out.vectors.col(i) = vectors.col(order[i]);
  }
  return out;
}

}  // namespace

EigPairs generalized_eigs(const Mat& a, const Mat& b, int k, EigWhich which) {
  if (k < 1) throw EigFailure("generalized_eigs: k must be positive");
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw EigFailure("generalized_eigs: dimension mismatch");

  const double a_scale = std::max(a.cwiseAbs().maxCoeff(), kEps);
  const bool a_sym = (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * a_scale;
  if (a_sym) {
    Eigen::LLT<Mat> llt(b);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a, b);
      if (es.info() != Eigen::Success)
        throw EigFailure("generalized_eigs: symmetric solver failed");
      return take_pairs(es.eigenvalues().cast<std::complex<double>>(),
                        es.eigenvectors().cast<std::complex<double>>(), k, which);
    }
  }

  Eigen::GeneralizedEigenSolver<Mat> ges;
  ges.compute(a, b, true);
  if (ges.info() != Eigen::Success)
    throw EigFailure("generalized_eigs: QZ iteration failed");
  const auto& alphas = ges.alphas();
  const Vec betas = ges.betas();
  const double beta_scale = betas.cwiseAbs().maxCoeff();
  if (beta_scale <= 0.0)
    throw EigFailure("generalized_eigs: pencil has no finite eigenvalues");

  std::vector<int> finite;
  for (Eigen::Index i = 0; i < betas.size(); ++i)
    if (std::abs(betas[i]) > 1e-10 * beta_scale) finite.push_back(static_cast<int>(i));
  if (finite.empty())
    throw EigFailure("generalized_eigs: pencil has no finite eigenvalues");

  CVec values(finite.size());
  CMat vectors(a.rows(), static_cast<Eigen::Index>(finite.size()));
  for (size_t j = 0; j < finite.size(); ++j) {
    values[static_cast<Eigen::Index>(j)] = alphas[finite[j]] / betas[finite[j]];
    vectors.col(static_cast<Eigen::Index>(j)) = ges.eigenvectors().col(finite[j]);
  }
  return take_pairs(values, vectors, k, which);
}

namespace {

Vec deterministic_unit(int n, int phase) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(0.7 * (i + 1) + phase) + 0.05;
  v /= v.norm();
  return v;
}

void fix_sign(Vec& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
}

Vec near_null_iterative(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  // spectral-norm estimate via a few power iterations on A^T A
  Vec p = deterministic_unit(n, 2);
  double sigma_max = 0.0;
  for (int it = 0; it < 6; ++it) {
    p = a.transpose() * (a * p).eval();
    sigma_max = std::sqrt(p.norm());
    p /= p.norm();
  }

  Mat q(n, 2);
  q.col(0) = deterministic_unit(n, 0);
  q.col(1) = deterministic_unit(n, 1);
  q.col(1) -= q.col(0) * (q.col(0).dot(q.col(1)));
  q.col(1) /= q.col(1).norm();

  Eigen::PartialPivLU<Mat> lu(a);
  {
    Vec probe = lu.solve(q.col(0));
    if (!probe.allFinite()) {
      const double ridge = 1e-14 * std::max(a.cwiseAbs().maxCoeff(), 1.0);
      lu.compute(a + ridge * Mat::Identity(n, n));
    }
  }

  double s1 = 0.0, s2 = 0.0, s1_prev = -1.0;
  for (int it = 0; it < 60; ++it) {
    Mat z(n, 2);
    for (int c = 0; c < 2; ++c) {
      Vec w = lu.transpose().solve(Vec(q.col(c)));
      z.col(c) = lu.solve(w);
    }
    Eigen::HouseholderQR<Mat> qr(z);
    q = qr.householderQ() * Mat::Identity(n, 2);

    Mat bq = a * q;
    Mat g = bq.transpose() * bq;
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    s1 = std::sqrt(std::max(es.eigenvalues()[0], 0.0));
    s2 = std::sqrt(std::max(es.eigenvalues()[1], 0.0));
    q = (q * es.eigenvectors()).eval();
    if (it >= 3 && std::abs(s1 - s1_prev) <= 1e-5 * std::max(s1, kEps * sigma_max))
      break;
    s1_prev = s1;
  }
  // Separation is judged against the kernel singular value itself, not the
  // matrix scale: stiff operators make sigma_max huge while genuinely distinct
  // neighbouring modes sit many orders below it. The absolute floor catches
  // exact double kernels.
  if (s2 <= std::max(10.0 * s1, 64 * n * kEps * sigma_max))
    throw DegenerateKernel("near_null_vector: smallest singular values nearly coincide");
  Vec v = q.col(0);
  v /= v.norm();
  fix_sign(v);
  return v;
}

}  // namespace

Vec near_null_vector(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  if (n > 800) return near_null_iterative(a);

  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double s_small = sv[n - 1];
  const double s_next = sv[n - 2];
  if (s_next <= std::max(10.0 * s_small, 64 * n * kEps * sv[0]))
    throw DegenerateKernel("near_null_vector: smallest singular values nearly coincide");
  Vec v = svd.matrixV().col(n - 1);
  fix_sign(v);
  return v;
}

ShiftInvertEigs eigs_shift_invert(const std::function<Vec(const Vec&)>& apply,
                                  int n, double sigma, int subspace, int k) {
  const int m = std::min(subspace, n);
  Mat v(n, m + 1);
  Mat h = Mat::Zero(m + 1, m);
  v.col(0) = deterministic_unit(n, 0);

  int steps = m;
  for (int j = 0; j < m; ++j) {
    Vec w = apply(Vec(v.col(j)));
    if (!w.allFinite()) throw EigFailure("eigs_shift_invert: operator returned non-finite values");
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const double c = v.col(i).dot(w);
        if (pass == 0)
          h(i, j) = c;
        else
          h(i, j) += c;
        w -= c * v.col(i);
      }
    }
    const double beta = w.norm();
    h(j + 1, j) = beta;
    if (beta <= 1e-13 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
      steps = j + 1;
      break;
    }
    v.col(j + 1) = w / beta;
  }

  Eigen::EigenSolver<Mat> es(h.topLeftCorner(steps, steps));
  if (es.info() != Eigen::Success) throw EigFailure("eigs_shift_invert: Hessenberg eig failed");
  const double tail = (steps < m) ? 0.0 : h(steps, steps - 1);

  struct Ritz {
    std::complex<double> lambda;
    double resid;
    double dist;
  };
  std::vector<Ritz> ritz;
  for (int i = 0; i < steps; ++i) {
    const std::complex<double> theta = es.eigenvalues()[i];
    if (std::abs(theta) < 1e-300) continue;
    const double resid =
        std::abs(tail) * std::abs(es.eigenvectors()(steps - 1, i)) / std::abs(theta);
    if (resid > 1e-6) continue;
    const std::complex<double> lambda = sigma + 1.0 / theta;
    ritz.push_back({lambda, resid, std::abs(lambda - sigma)});
  }
  std::stable_sort(ritz.begin(), ritz.end(),
                   [](const Ritz& x, const Ritz& y) { return x.dist < y.dist; });

  const int keep = std::min<int>(k, static_cast<int>(ritz.size()));
  ShiftInvertEigs out;
  out.values.resize(keep);
  out.resid.resize(keep);
  for (int i = 0; i < keep; ++i) {
    out.values[i] = ritz[i].lambda;
    out.resid[i] = ritz[i].resid;
  }
  return out;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fracpath
