#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// library's solver paths; the SVD is a one-sided Jacobi sweep written from
// scratch so the shrinkage and nuclear-norm checks do not share code with
// the implementation under test.

#include "lrdlsr/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace lrdlsr::oracle {

struct JacobiSvd {
  Matrix u;  // m x r
  Vector s;  // r, non-increasing
  Matrix v;  // n x r
};

/// One-sided (Hestenes) Jacobi SVD on a copy of a, thin, r = min(m, n).
inline JacobiSvd jacobi_svd(const Matrix& a) {
  const bool wide = a.rows() < a.cols();
  Matrix w = wide ? Matrix(a.transpose()) : a;  // tall: m >= n
  const Index m = w.rows();
  const Index n = w.cols();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (Index i = 0; i < m; ++i) {
          alpha += w(i, p) * w(i, p);
          beta += w(i, q) * w(i, q);
          gamma += w(i, p) * w(i, q);
        }
        if (gamma == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Index i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (off < 1e-15) break;
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    double sq = 0.0;
    for (Index i = 0; i < m; ++i) sq += w(i, j) * w(i, j);
    norms[static_cast<std::size_t>(j)] = std::sqrt(sq);
  }
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return norms[static_cast<std::size_t>(x)] > norms[static_cast<std::size_t>(y)];
  });
  JacobiSvd out{Matrix::Zero(m, n), Vector(n), Matrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    const Index j = order[static_cast<std::size_t>(k)];
    const double sigma = norms[static_cast<std::size_t>(j)];
    out.s(k) = sigma;
    if (sigma > 0.0) out.u.col(k) = w.col(j) / sigma;
    out.v.col(k) = v.col(j);
  }
  if (wide) std::swap(out.u, out.v);
  return out;
}

inline Matrix svt_reference(const Matrix& theta, double zeta) {
  const JacobiSvd f = jacobi_svd(theta);
  Matrix out = Matrix::Zero(theta.rows(), theta.cols());
  for (Index k = 0; k < f.s.size(); ++k) {
    const double shrunk = std::max(0.0, f.s(k) - zeta);
    if (shrunk > 0.0) out += shrunk * f.u.col(k) * f.v.col(k).transpose();
  }
  return out;
}

inline double nuclear_norm_reference(const Matrix& a) { return jacobi_svd(a).s.sum(); }

inline double frobenius_sq_loop(const Matrix& a) {
  double sum = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) sum += a(i, j) * a(i, j);
  return sum;
}

inline Matrix matmul_loop(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      for (Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

/// Minimizes ||QX - H||^2 + lambda ||Q||^2 by plain gradient descent.
inline Matrix lsr_gradient_descent(const Matrix& x, const Matrix& h, double lambda, int steps) {
  // trace(XX^T) + lambda bounds the largest eigenvalue of XX^T + lambda I.
  const double lipschitz = 2.0 * (x.squaredNorm() + lambda);
  const double step = 1.0 / lipschitz;
  Matrix q = Matrix::Zero(h.rows(), x.rows());
  const Matrix hxt = h * x.transpose();
  const Matrix gram = x * x.transpose();
  for (int k = 0; k < steps; ++k) {
    const Matrix grad = 2.0 * (q * gram - hxt + lambda * q);
    q -= step * grad;
  }
  return q;
}

/// argmin_{m >= 0} (r - b m)^2: coarse scan then ternary refinement.
inline double scalar_nonneg_min(double r, double b) {
  auto f = [&](double m) { return (r - b * m) * (r - b * m); };
  const double hi = std::max(2.0, 2.0 * std::abs(r) + 1.0);
  const double step = 0.001;
  double best = 0.0;
  for (double m = 0.0; m <= hi; m += step) {
    if (f(m) < f(best)) best = m;
  }
  double lo = std::max(0.0, best - step), up = best + step;
  for (int it = 0; it < 200; ++it) {
    const double a = lo + (up - lo) / 3.0, c = up - (up - lo) / 3.0;
    if (f(a) <= f(c)) up = c; else lo = a;
  }
  return 0.5 * (lo + up);
}

/// Nearest projected training column by exhaustive scalar loops.
inline std::vector<int> brute_force_nn(const Matrix& q, const Matrix& train_x,
                                       const std::vector<int>& train_labels, const Matrix& test_x) {
  const Matrix ptrain = matmul_loop(q, train_x);
  const Matrix ptest = matmul_loop(q, test_x);
  std::vector<int> out;
  for (Index j = 0; j < ptest.cols(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    int label = -1;
    for (Index i = 0; i < ptrain.cols(); ++i) {
      double d = 0.0;
      for (Index r = 0; r < ptrain.rows(); ++r) {
        const double diff = ptrain(r, i) - ptest(r, j);
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        label = train_labels[static_cast<std::size_t>(i)];
      }
    }
    out.push_back(label);
  }
  return out;
}

inline Matrix random_matrix(std::mt19937_64& gen, Index rows, Index cols) {
  std::normal_distribution<double> dist;
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = dist(gen);
  return a;
}

/// Random perturbation with Frobenius norm drawn from [radius/2, radius].
inline Matrix random_perturbation(std::mt19937_64& gen, Index rows, Index cols, double radius) {
  Matrix d = random_matrix(gen, rows, cols);
  std::uniform_real_distribution<double> scale(0.5 * radius, radius);
  return d * (scale(gen) / d.norm());
}

/// True when f(p) <= f(p + delta) for `trials` random delta with ||delta|| <= radius.
inline bool beats_perturbations(const std::function<double(const Matrix&)>& f, const Matrix& p,
                                std::mt19937_64& gen, int trials = 1000, double radius = 0.01) {
  const double base = f(p);
  const double slack = 1e-12 * std::max(1.0, std::abs(base));
  for (int k = 0; k < trials; ++k) {
    if (f(p + random_perturbation(gen, p.rows(), p.cols(), radius)) < base - slack) return false;
  }
  return true;
}

/// Class ids 0..c-1 with every class present, shuffled.
inline std::vector<int> random_labels(std::mt19937_64& gen, int classes, Index n) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) ids[static_cast<std::size_t>(j)] = static_cast<int>(j % classes);
  std::shuffle(ids.begin(), ids.end(), gen);
  return ids;
}

}  // namespace lrdlsr::oracle
