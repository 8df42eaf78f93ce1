#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "fracpath/mesh_fem.hpp"

namespace fracpath {

/// Cholesky factorization of a symmetric positive definite matrix with an
/// LDLT fallback for indefinite input. Throws SingularMatrix when the
/// condition estimate exceeds 1e15.
class SpdFactor {
 public:
  explicit SpdFactor(const Mat& a);

  Vec solve(const Vec& rhs) const;
  Mat solve(const Mat& rhs) const;
  /// Solve with one triangular sweep per column. Arithmetic per column is
  /// identical to a single-column solve, which keeps differently ordered
  /// builds bitwise comparable.
  Mat solve_columnwise(const Mat& rhs) const;

  double rcond() const { return rcond_; }
  bool indefinite() const { return indefinite_; }

 private:
  Eigen::LLT<Mat> llt_;
  Eigen::LDLT<Mat> ldlt_;
  bool indefinite_ = false;
  double rcond_ = 0.0;
};

/// Minimum-norm least-squares solver (complete orthogonal decomposition,
/// rank threshold n * eps relative to the largest pivot).
class MinNormSolver {
 public:
  explicit MinNormSolver(const Mat& a);
  Vec solve(const Vec& rhs) const;
  Mat solve(const Mat& rhs) const;
  Mat solve_columnwise(const Mat& rhs) const;
  Eigen::Index rank() const { return cod_.rank(); }

 private:
  Eigen::CompleteOrthogonalDecomposition<Mat> cod_;
};

Vec minnorm_lstsq(const Mat& a, const Vec& b);

enum class EigWhich { smallest_magnitude, largest_real };

struct EigPairs {
  CVec values;
  CMat vectors;  // column i pairs with values[i]
};

/// Up to k finite eigenpairs of the pencil A v = lambda B v. B must be
/// symmetric positive semidefinite; infinite modes from a singular B are
/// filtered out. Uses the symmetric-definite solver when A is symmetric and
/// B is well-conditioned SPD, real QZ otherwise.
EigPairs generalized_eigs(const Mat& a, const Mat& b, int k, EigWhich which);

/// Unit right singular vector for the smallest singular value, with a
/// deterministic sign. Throws DegenerateKernel when the two smallest
/// singular values are separated by less than 1e-6 relative to the largest.
Vec near_null_vector(const Mat& a);

struct ShiftInvertEigs {
  CVec values;                 // pencil eigenvalues, sorted by |lambda - sigma|
  std::vector<double> resid;   // relative Ritz residuals (shift-inverted op)
};

/// Deterministic shift-invert Arnoldi for the pencil A v = lambda B v.
/// `apply` must evaluate x -> (A - sigma B)^{-1} (B x). Returns up to k
/// converged Ritz values nearest the shift.
ShiftInvertEigs eigs_shift_invert(const std::function<Vec(const Vec&)>& apply,
                                  int n, double sigma, int subspace, int k);

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fracpath
