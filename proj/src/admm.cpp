#include "lrdlsr/admm.hpp"

#include "lrdlsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lrdlsr {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(std::string("hyperparameters: ") + what);
}

Matrix gather_columns(const Matrix& a, const std::vector<Index>& cols) {
  Matrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = a.col(cols[j]);
  return out;
}

void check_finite(const Matrix& a, const char* block, std::size_t iter) {
  if (!a.allFinite()) {
    throw NumericError(std::string("lrdlsr: non-finite values in block ") + block +
                       " at iteration " + std::to_string(iter));
  }
}

void check_state_shapes(const AdmmState& s, const AdmmProblem& problem) {
  const Index c = problem.labels().num_classes();
  const Index n = problem.labels().num_samples();
  const Index d = problem.x().rows();
  auto is = [](const Matrix& a, Index r, Index k) { return a.rows() == r && a.cols() == k; };
  if (!is(s.t, c, n) || !is(s.p, c, n) || !is(s.y, c, n) || !is(s.m.m, c, n) || !is(s.q, c, d)) {
    throw DimensionError("lrdlsr: state shapes inconsistent with a " + std::to_string(c) +
                         "-class problem of " + std::to_string(n) + " samples in " +
                         std::to_string(d) + " dimensions");
  }
}

}  // namespace

void Hyperparams::validate() const {
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive");
  require(beta >= 0.0 && std::isfinite(beta), "beta must be non-negative");
  require(gamma >= 0.0 && std::isfinite(gamma), "gamma must be non-negative");
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  require(mu0 > 0.0 && std::isfinite(mu0), "mu0 must be positive");
  require(rho > 1.0 && std::isfinite(rho), "rho must exceed 1");
  require(mu_max >= mu0 && std::isfinite(mu_max), "mu_max must be at least mu0");
  require(tol > 0.0, "tol must be positive");
}

AdmmProblem::AdmmProblem(const Matrix& x, const OneHotLabels& labels, double lambda)
    : x_(x), labels_(labels), sign_(build_sign_matrix(labels)), ridge_(x, lambda) {
  if (x.cols() != labels.num_samples()) {
    throw DimensionError("lrdlsr: data has " + std::to_string(x.cols()) + " samples but " +
                         std::to_string(labels.num_samples()) + " labels");
  }
}

AdmmState initial_state(const AdmmProblem& problem, const Hyperparams& hp) {
  const Matrix& h = problem.labels().h();
  AdmmState s;
  s.t = h;
  s.p = h;
  s.q = Matrix::Zero(h.rows(), problem.x().rows());
  s.m.m = Matrix::Ones(h.rows(), h.cols());
  s.y = Matrix::Zero(h.rows(), h.cols());
  s.mu = hp.mu0;
  s.iter = 0;
  return s;
}

double classwise_nuclear_norm(const Matrix& a, const OneHotLabels& labels) {
  double total = 0.0;
  for (int k = 0; k < labels.num_classes(); ++k) {
    total += nuclear_norm(gather_columns(a, labels.members(k)));
  }
  return total;
}

double objective(const AdmmState& s, const AdmmProblem& problem, const Hyperparams& hp) {
  check_state_shapes(s, problem);
  const Matrix relaxed = relaxed_targets(problem.labels(), problem.sign(), s.m);
  double value = 0.5 * frobenius_norm_sq(s.q * problem.x() - s.t) +
                 0.5 * hp.alpha * frobenius_norm_sq(s.t - relaxed) +
                 0.5 * hp.gamma * frobenius_norm_sq(s.t) + 0.5 * hp.lambda * frobenius_norm_sq(s.q);
  if (hp.beta != 0.0) value += hp.beta * classwise_nuclear_norm(s.t, problem.labels());
  return value;
}

double lagrangian(const AdmmState& s, const AdmmProblem& problem, const Hyperparams& hp) {
  check_state_shapes(s, problem);
  const Matrix relaxed = relaxed_targets(problem.labels(), problem.sign(), s.m);
  double value = 0.5 * frobenius_norm_sq(s.q * problem.x() - s.t) +
                 0.5 * hp.alpha * frobenius_norm_sq(s.t - relaxed) +
                 0.5 * hp.gamma * frobenius_norm_sq(s.t) + 0.5 * hp.lambda * frobenius_norm_sq(s.q) +
                 0.5 * s.mu * frobenius_norm_sq(s.t - s.p + s.y / s.mu);
  if (hp.beta != 0.0) value += hp.beta * classwise_nuclear_norm(s.p, problem.labels());
  return value;
}

Matrix update_t(const AdmmState& s, const AdmmProblem& problem, const Hyperparams& hp) {
  check_state_shapes(s, problem);
  const Matrix relaxed = relaxed_targets(problem.labels(), problem.sign(), s.m);
  return (s.q * problem.x() + hp.alpha * relaxed + s.mu * s.p - s.y) /
         (1.0 + hp.alpha + hp.gamma + s.mu);
}

Matrix update_p_classwise(const Matrix& t, const Matrix& y, double mu, double beta,
                          const OneHotLabels& labels) {
  if (!(mu > 0.0)) throw ParameterError("update_p: mu must be positive");
  if (!(beta >= 0.0)) throw ParameterError("update_p: beta must be non-negative");
  if (t.rows() != labels.num_classes() || t.cols() != labels.num_samples() ||
      y.rows() != t.rows() || y.cols() != t.cols()) {
    throw DimensionError("update_p: T and Y must match the label matrix shape");
  }
  Matrix shifted = t + y / mu;
  if (beta == 0.0) return shifted;
  const double zeta = beta / mu;
  Matrix p(t.rows(), t.cols());
  for (int k = 0; k < labels.num_classes(); ++k) {
    const auto& cols = labels.members(k);
    const Matrix block = svt(gather_columns(shifted, cols), zeta);
    for (std::size_t j = 0; j < cols.size(); ++j) p.col(cols[j]) = block.col(static_cast<Index>(j));
  }
  return p;
}

Matrix update_q(const Matrix& t, const AdmmProblem& problem) {
  return problem.ridge().solve_right(t);
}

AdmmState step(const AdmmState& state, const AdmmProblem& problem, const Hyperparams& hp) {
  AdmmState next = state;
  next.iter = state.iter + 1;
  const std::size_t it = next.iter;

  next.t = update_t(next, problem, hp);
  check_finite(next.t, "T", it);
  next.p = update_p_classwise(next.t, next.y, next.mu, hp.beta, problem.labels());
  check_finite(next.p, "P", it);
  next.q = update_q(next.t, problem);
  check_finite(next.q, "Q", it);
  next.m = update_m(next.t, problem.labels(), problem.sign());
  check_finite(next.m.m, "M", it);
  next.y = next.y + next.mu * (next.t - next.p);
  check_finite(next.y, "Y", it);
  next.mu = std::min(hp.mu_max, hp.rho * next.mu);
  return next;
}

TrainedModel fit_lrdlsr(const Matrix& x, const OneHotLabels& labels, const Hyperparams& hp) {
  hp.validate();
  const AdmmProblem problem(x, labels, hp.lambda);
  AdmmState state = initial_state(problem, hp);

  TrainedModel model;
  model.status = SolveStatus::MaxIters;
  while (state.iter < hp.max_iters) {
    const double mu_used = state.mu;
    AdmmState next = step(state, problem, hp);
    const double residual = max_abs(next.t - next.p);
    const double change = max_abs(next.t - state.t);
    state = std::move(next);

    // The trace reports mu as used by this iteration's block updates.
    AdmmState at_mu = state;
    at_mu.mu = mu_used;
    model.trace.records.push_back({state.iter, objective(state, problem, hp),
                                   lagrangian(at_mu, problem, hp), residual, mu_used});

    bool done = residual <= hp.tol;
    if (hp.stop_rule == StopRule::FeasibilityAndStability) done = done && change <= hp.tol;
    if (done) {
      model.status = SolveStatus::Converged;
      break;
    }
  }
  model.q = std::move(state.q);
  model.t = std::move(state.t);
  model.m = std::move(state.m.m);
  model.projected_train = model.q * x;
  model.train_labels = labels.class_index();
  model.iterations = state.iter;
  return model;
}

}  // namespace lrdlsr
