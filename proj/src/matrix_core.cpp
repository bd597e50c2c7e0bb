#include "lrdlsr/matrix_core.hpp"

#include "lrdlsr/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace lrdlsr {

namespace {

std::string shape_of(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

template <typename Svd>
double condition_estimate(const Svd& dec) {
  const Vector& s = dec.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 0.0) return INFINITY;
  return s(0) / s(s.size() - 1);
}

}  // namespace

Index SvdFactors::rank(double rel_tol) const {
  if (singular_values.size() == 0) return 0;
  const double cutoff = rel_tol * singular_values(0);
  Index r = 0;
  while (r < singular_values.size() && singular_values(r) > cutoff) ++r;
  return r;
}

Matrix SvdFactors::reconstruct() const {
  return u * singular_values.asDiagonal() * v.transpose();
}

double frobenius_norm_sq(const Matrix& a) { return a.squaredNorm(); }

double nuclear_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return svd(a).singular_values.sum();
}

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("hadamard: shape mismatch " + shape_of(a) + " vs " + shape_of(b));
  }
  return a.cwiseProduct(b);
}

SvdFactors svd(const Matrix& a) {
  if (!a.allFinite()) {
    throw NumericError("svd: non-finite entries in " + shape_of(a) + " input");
  }
  constexpr unsigned kOptions = Eigen::ComputeThinU | Eigen::ComputeThinV;
  Eigen::BDCSVD<Matrix> dec(a, kOptions);
  if (dec.info() != Eigen::Success) {
    // Divide-and-conquer occasionally gives up on badly graded spectra; the
    // two-sided Jacobi sweep is slower but more robust.
    Eigen::JacobiSVD<Matrix> fallback(a, kOptions);
    if (fallback.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "svd: factorization did not converge for " << shape_of(a)
          << " input (condition estimate " << condition_estimate(fallback) << ")";
      throw NumericError(msg.str());
    }
    return {fallback.matrixU(), fallback.singularValues(), fallback.matrixV()};
  }
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix svt(const Matrix& theta, double zeta) {
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) {
    throw ParameterError("svt: threshold must be finite and non-negative");
  }
  SvdFactors f = svd(theta);
  const Index r = f.singular_values.size();
  Index kept = 0;
  for (Index j = 0; j < r; ++j) {
    const double shrunk = std::max(0.0, f.singular_values(j) - zeta);
    f.singular_values(j) = shrunk;
    if (shrunk > 0.0) kept = j + 1;
  }
  if (kept == 0) return Matrix::Zero(theta.rows(), theta.cols());
  return f.u.leftCols(kept) * f.singular_values.head(kept).asDiagonal() *
         f.v.leftCols(kept).transpose();
}

RidgeSolver::RidgeSolver(const Matrix& x, double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("ridge solve: lambda must be positive and finite");
  }
  if (!x.allFinite()) throw NumericError("ridge solve: non-finite data matrix");
  const Index d = x.rows();
  Matrix gram = Matrix::Identity(d, d) * lambda;
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
  Eigen::LLT<Matrix> llt(gram.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) {
    throw NumericError("ridge solve: Cholesky factorization of the " + std::to_string(d) + "x" +
                       std::to_string(d) + " regularized Gram matrix failed");
  }
  // (A^{-1} X)^T = X^T A^{-1} since A is symmetric.
  right_operator_ = llt.solve(x).transpose();
}

Matrix RidgeSolver::solve_right(const Matrix& t) const {
  if (t.cols() != right_operator_.rows()) {
    throw DimensionError("ridge solve: target has " + std::to_string(t.cols()) +
                         " columns, data has " + std::to_string(right_operator_.rows()) +
                         " samples");
  }
  return t * right_operator_;
}

Matrix ridge_solve_right(const Matrix& t, const Matrix& x, double lambda) {
  if (t.cols() != x.cols()) {
    throw DimensionError("ridge solve: target " + shape_of(t) + " incompatible with data " +
                         shape_of(x));
  }
  return RidgeSolver(x, lambda).solve_right(t);
}

}  // namespace lrdlsr
