#pragma once

// ADMM solver for low-rank discriminative least squares regression:
//
//   min_{Q,T,M>=0}  1/2 ||QX - T||^2 + alpha/2 ||T - (H + B (.) M)||^2
//                 + beta * sum_i ||T_i||_* + gamma/2 ||T||^2 + lambda/2 ||Q||^2
//
// where T_i is the column block of T belonging to class i. The nuclear norm
// is split off through an auxiliary copy P of T (constraint T = P) with
// multiplier Y and an increasing penalty mu.

#include "lrdlsr/matrix_core.hpp"
#include "lrdlsr/models.hpp"

#include <cstddef>
#include <vector>

namespace lrdlsr {

enum class StopRule {
  /// ||T - P||_inf <= tol only.
  Feasibility,
  /// ||T - P||_inf <= tol and ||T_k - T_{k-1}||_inf <= tol.
  FeasibilityAndStability,
};

struct Hyperparams {
  double alpha = 0.1;
  double beta = 0.01;
  double gamma = 0.01;
  double lambda = 0.01;
  double mu0 = 1e-5;
  double rho = 1.1;
  double mu_max = 1e8;
  double tol = 1e-6;
  std::size_t max_iters = 500;
  StopRule stop_rule = StopRule::FeasibilityAndStability;

  /// Throws ParameterError naming the first field out of range.
  void validate() const;
};

struct AdmmState {
  Matrix t;            // c x n targets
  Matrix p;            // c x n auxiliary copy of t
  Matrix q;            // c x d projection
  RelaxationMatrix m;  // c x n
  Matrix y;            // c x n multiplier
  double mu = 0.0;
  std::size_t iter = 0;
};

/// Immutable per-fit data: X, labels, sign matrix and the ridge
/// factorization reused by every Q update.
class AdmmProblem {
 public:
  AdmmProblem(const Matrix& x, const OneHotLabels& labels, double lambda);

  const Matrix& x() const { return x_; }
  const OneHotLabels& labels() const { return labels_; }
  const SignMatrix& sign() const { return sign_; }
  const RidgeSolver& ridge() const { return ridge_; }

 private:
  Matrix x_;
  OneHotLabels labels_;
  SignMatrix sign_;
  RidgeSolver ridge_;
};

/// T = P = H, Q = 0, M = 1, Y = 0, mu = mu0.
AdmmState initial_state(const AdmmProblem& problem, const Hyperparams& hp);

/// sum_i ||A_i||_* over the class column blocks of a.
double classwise_nuclear_norm(const Matrix& a, const OneHotLabels& labels);

/// The regularized regression objective evaluated at (state.t, state.q, state.m).
double objective(const AdmmState& state, const AdmmProblem& problem, const Hyperparams& hp);

/// Augmented Lagrangian: objective with the nuclear term on P plus
/// mu/2 ||T - P + Y/mu||^2.
double lagrangian(const AdmmState& state, const AdmmProblem& problem, const Hyperparams& hp);

/// Closed-form T block: (1+alpha+gamma+mu)^{-1} [QX + alpha(H + B (.) M) + mu P - Y].
Matrix update_t(const AdmmState& state, const AdmmProblem& problem, const Hyperparams& hp);

/// P_i = svt(T_i + Y_i / mu, beta / mu) for every class block i.
Matrix update_p_classwise(const Matrix& t, const Matrix& y, double mu, double beta,
                          const OneHotLabels& labels);

/// Q = T X^T (X X^T + lambda I)^{-1} through the cached factorization.
Matrix update_q(const Matrix& t, const AdmmProblem& problem);

/// One pass in the order T, P, Q, M, Y, mu. Throws NumericError naming the
/// block and iteration when a block turns non-finite.
AdmmState step(const AdmmState& state, const AdmmProblem& problem, const Hyperparams& hp);

/// Iterates step() from initial_state() until the stop rule holds (checked
/// after each step) or max_iters is reached. Inputs are expected to be
/// column-normalized.
TrainedModel fit_lrdlsr(const Matrix& x, const OneHotLabels& labels, const Hyperparams& hp);

}  // namespace lrdlsr
