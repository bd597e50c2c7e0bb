#pragma once

// Dense kernels shared by all solvers: norms, Hadamard product, thin SVD,
// singular value shrinkage and ridge solves against a cached factorization.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstddef>

namespace lrdlsr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical tolerances used by the kernels and their checks.
struct Tolerances {
  double orthogonality = 1e-10;
  double reconstruction = 1e-8;
  /// Singular values below rank_relative * sigma_max count as zero.
  double rank_relative = 1e-12;
};

inline constexpr Tolerances kDefaultTolerances{};

/// Thin SVD a = u * diag(singular_values) * v^T with r = min(rows, cols).
struct SvdFactors {
  Matrix u;
  Vector singular_values;  // non-increasing, >= 0
  Matrix v;

  /// Numerical rank: count of singular values above tol * sigma_max.
  Index rank(double rel_tol = kDefaultTolerances.rank_relative) const;
  Matrix reconstruct() const;
};

double frobenius_norm_sq(const Matrix& a);

/// Sum of singular values.
double nuclear_norm(const Matrix& a);

/// Largest absolute entry (entrywise infinity norm).
double max_abs(const Matrix& a);

bool all_finite(const Matrix& a);

/// Entrywise product; throws DimensionError on shape mismatch.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Throws NumericError if the factorization fails or the input is non-finite.
SvdFactors svd(const Matrix& a);

/// Singular value shrinkage: U diag(max(0, sigma - zeta)) V^T. This is the
/// proximal map of zeta * ||.||_* evaluated at theta.
Matrix svt(const Matrix& theta, double zeta);

/// Solves Q (X X^T + lambda I) = T X^T for Q.
///
/// The d x d system is factored once (Cholesky) at construction and the
/// n x d operator X^T (X X^T + lambda I)^{-1} is cached, so each solve costs a
/// single c x n by n x d product.
class RidgeSolver {
 public:
  RidgeSolver(const Matrix& x, double lambda);

  Matrix solve_right(const Matrix& t) const;

  Index feature_dim() const { return right_operator_.cols(); }
  Index sample_count() const { return right_operator_.rows(); }
  double lambda() const { return lambda_; }

 private:
  double lambda_;
  Matrix right_operator_;  // n x d
};

/// One-shot T X^T (X X^T + lambda I)^{-1}.
Matrix ridge_solve_right(const Matrix& t, const Matrix& x, double lambda);

}  // namespace lrdlsr
