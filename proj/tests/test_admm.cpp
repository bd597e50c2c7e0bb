#include "lrdlsr/admm.hpp"
#include "lrdlsr/data.hpp"
#include "lrdlsr/errors.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace lrdlsr {
namespace {

OneHotLabels toy_labels() {
  const std::vector<int> ids{0, 0, 1, 1};
  return OneHotLabels(ids, 2);
}

Hyperparams unit_hp() {
  Hyperparams hp;
  hp.alpha = hp.beta = hp.gamma = hp.lambda = 1.0;
  return hp;
}

AdmmState random_state(std::mt19937_64& gen, Index c, Index d, Index n) {
  AdmmState s;
  s.t = oracle::random_matrix(gen, c, n);
  s.p = oracle::random_matrix(gen, c, n);
  s.q = oracle::random_matrix(gen, c, d);
  s.m.m = oracle::random_matrix(gen, c, n).cwiseAbs();
  s.y = oracle::random_matrix(gen, c, n);
  s.mu = 0.7;
  return s;
}

// Scalar-loop evaluation of the regularized objective.
double objective_reference(const AdmmState& s, const Matrix& x, const OneHotLabels& labels,
                           const Hyperparams& hp) {
  const Matrix qx = oracle::matmul_loop(s.q, x);
  const Matrix& h = labels.h();
  double fit = 0.0, drag = 0.0, energy = 0.0, ridge = 0.0;
  for (Index i = 0; i < s.t.rows(); ++i) {
    for (Index j = 0; j < s.t.cols(); ++j) {
      const double sign = h(i, j) == 1.0 ? 1.0 : -1.0;
      const double target = h(i, j) + sign * s.m.m(i, j);
      fit += (qx(i, j) - s.t(i, j)) * (qx(i, j) - s.t(i, j));
      drag += (s.t(i, j) - target) * (s.t(i, j) - target);
      energy += s.t(i, j) * s.t(i, j);
    }
  }
  ridge = oracle::frobenius_sq_loop(s.q);
  double nuclear = 0.0;
  for (int k = 0; k < labels.num_classes(); ++k) {
    const auto& cols = labels.members(k);
    Matrix block(s.t.rows(), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) block.col(static_cast<Index>(j)) = s.t.col(cols[j]);
    nuclear += oracle::nuclear_norm_reference(block);
  }
  return 0.5 * fit + 0.5 * hp.alpha * drag + hp.beta * nuclear + 0.5 * hp.gamma * energy +
         0.5 * hp.lambda * ridge;
}

TEST(Objective, HandEvaluatedToy) {
  std::mt19937_64 gen(20);
  const OneHotLabels labels = toy_labels();
  const AdmmProblem problem(oracle::random_matrix(gen, 3, 4), labels, 1.0);
  AdmmState s = initial_state(problem, unit_hp());
  s.m.m.setZero();
  EXPECT_NEAR(objective(s, problem, unit_hp()), 4.0 + 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(objective(s, problem, unit_hp()), 6.82843, 1e-5);
}

TEST(Objective, OnlyRidgeTermWhenDataTermsVanish) {
  std::mt19937_64 gen(21);
  const OneHotLabels labels = toy_labels();
  const AdmmProblem problem(Matrix::Identity(4, 4), labels, 0.5);
  Hyperparams hp = unit_hp();
  hp.beta = hp.gamma = 0.0;
  hp.lambda = 0.5;
  AdmmState s = initial_state(problem, hp);
  s.m.m = oracle::random_matrix(gen, 2, 4).cwiseAbs();
  s.t = labels.h() + hadamard(problem.sign().b, s.m.m);
  s.q = s.t;  // X = I so QX = T
  EXPECT_NEAR(objective(s, problem, hp), 0.25 * s.q.squaredNorm(), 1e-12);
}

TEST(Objective, MatchesScalarLoopReference) {
  std::mt19937_64 gen(22);
  const OneHotLabels labels(oracle::random_labels(gen, 3, 7), 3);
  const Matrix x = oracle::random_matrix(gen, 4, 7);
  const AdmmProblem problem(x, labels, 0.3);
  Hyperparams hp;
  hp.alpha = 0.7;
  hp.beta = 0.4;
  hp.gamma = 0.2;
  hp.lambda = 0.3;
  const AdmmState s = random_state(gen, 3, 4, 7);
  EXPECT_NEAR(objective(s, problem, hp), objective_reference(s, x, labels, hp), 1e-10);
}

TEST(Objective, InvariantToIntraClassPermutation) {
  std::mt19937_64 gen(23);
  const std::vector<int> ids{0, 1, 0, 1, 0, 2, 2};
  const OneHotLabels labels(ids, 3);
  const Matrix x = oracle::random_matrix(gen, 4, 7);
  const Hyperparams hp = unit_hp();
  const AdmmState s = random_state(gen, 3, 4, 7);
  // Swap samples 0 and 4 (both class 0) in every column-indexed quantity.
  auto swap_cols = [](Matrix a) {
    a.col(0).swap(a.col(4));
    return a;
  };
  AdmmState permuted = s;
  permuted.t = swap_cols(s.t);
  permuted.p = swap_cols(s.p);
  permuted.m.m = swap_cols(s.m.m);
  permuted.y = swap_cols(s.y);
  const double a = objective(s, AdmmProblem(x, labels, 1.0), hp);
  const double b = objective(permuted, AdmmProblem(swap_cols(x), labels, 1.0), hp);
  EXPECT_NEAR(a, b, 1e-9);
}

TEST(UpdateT, ReducesToProjectionWhenOtherTermsVanish) {
  std::mt19937_64 gen(24);
  const OneHotLabels labels = toy_labels();
  const Matrix x = oracle::random_matrix(gen, 3, 4);
  const AdmmProblem problem(x, labels, 1.0);
  Hyperparams hp;
  hp.alpha = 0.0;
  hp.gamma = 0.0;
  AdmmState s = random_state(gen, 2, 3, 4);
  s.y.setZero();
  s.mu = 1e-14;
  EXPECT_LE((update_t(s, problem, hp) - s.q * x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(UpdateT, DirectFormulaCase) {
  std::mt19937_64 gen(25);
  const OneHotLabels labels = toy_labels();
  const AdmmProblem problem(oracle::random_matrix(gen, 3, 4), labels, 1.0);
  Hyperparams hp = unit_hp();
  AdmmState s = initial_state(problem, hp);
  s.m.m.setZero();
  s.mu = 1.0;
  EXPECT_LE((update_t(s, problem, hp) - 0.5 * labels.h()).norm(), 1e-15);
}

TEST(UpdateT, Stationarity) {
  std::mt19937_64 gen(26);
  const OneHotLabels labels(oracle::random_labels(gen, 3, 9), 3);
  const Matrix x = oracle::random_matrix(gen, 5, 9);
  const AdmmProblem problem(x, labels, 0.1);
  Hyperparams hp;
  hp.alpha = 0.3;
  hp.gamma = 0.05;
  AdmmState s = random_state(gen, 3, 5, 9);
  s.t = update_t(s, problem, hp);
  const Matrix relaxed = relaxed_targets(labels, problem.sign(), s.m);
  const Matrix grad = (s.t - s.q * x) + hp.alpha * (s.t - relaxed) + hp.gamma * s.t +
                      s.mu * (s.t - s.p) + s.y;
  EXPECT_LE(grad.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(UpdateP, ZeroBetaIsShift) {
  std::mt19937_64 gen(27);
  const OneHotLabels labels(oracle::random_labels(gen, 2, 6), 2);
  const Matrix t = oracle::random_matrix(gen, 2, 6);
  const Matrix y = oracle::random_matrix(gen, 2, 6);
  EXPECT_EQ(update_p_classwise(t, y, 0.5, 0.0, labels), t + y / 0.5);
}

TEST(UpdateP, SingleClassDiagonal) {
  const std::vector<int> ids{0, 0};
  const OneHotLabels labels(ids, 1);
  Matrix t = Matrix::Zero(1, 2);
  // One class means c = 1, so use a 1 x 2 block whose only singular value
  // is 3 and check shrinkage by 2.
  t << 3, 0;
  const Matrix p = update_p_classwise(t, Matrix::Zero(1, 2), 0.5, 1.0, labels);
  EXPECT_NEAR(p(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(p(0, 1), 0.0, 1e-14);
}

TEST(UpdateP, DiagonalBlockShrinks) {
  // Two classes of two samples each, the first block being diag(3, 1).
  const std::vector<int> ids{0, 0, 1, 1};
  const OneHotLabels labels(ids, 2);
  Matrix t(2, 4);
  t << 3, 0, 0, 0, 0, 1, 0, 0;
  const Matrix p = update_p_classwise(t, Matrix::Zero(2, 4), 1.0, 2.0, labels);
  Matrix expected = Matrix::Zero(2, 4);
  expected(0, 0) = 1.0;
  EXPECT_LE((p - expected).norm(), 1e-14);
}

TEST(UpdateP, BlocksBeatRandomPerturbations) {
  std::mt19937_64 gen(28);
  const OneHotLabels labels(oracle::random_labels(gen, 2, 8), 2);
  const Matrix t = oracle::random_matrix(gen, 2, 8);
  const Matrix y = oracle::random_matrix(gen, 2, 8);
  const double mu = 2.0, beta = 0.6;
  const Matrix p = update_p_classwise(t, y, mu, beta, labels);
  for (int k = 0; k < 2; ++k) {
    const auto& cols = labels.members(k);
    Matrix tk(2, static_cast<Index>(cols.size())), yk = tk, pk = tk;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      tk.col(static_cast<Index>(j)) = t.col(cols[j]);
      yk.col(static_cast<Index>(j)) = y.col(cols[j]);
      pk.col(static_cast<Index>(j)) = p.col(cols[j]);
    }
    auto f = [&](const Matrix& cand) {
      return beta * oracle::nuclear_norm_reference(cand) +
             0.5 * mu * (tk - cand + yk / mu).squaredNorm();
    };
    EXPECT_TRUE(oracle::beats_perturbations(f, pk, gen));
  }
}

TEST(UpdateP, Errors) {
  const OneHotLabels labels = toy_labels();
  EXPECT_THROW(update_p_classwise(Matrix::Zero(2, 4), Matrix::Zero(2, 4), 0.0, 1.0, labels),
               ParameterError);
  EXPECT_THROW(update_p_classwise(Matrix::Zero(3, 4), Matrix::Zero(3, 4), 1.0, 1.0, labels),
               DimensionError);
}

TEST(UpdateQ, ClosedFormCases) {
  const std::vector<int> ids{0, 1};
  const OneHotLabels labels(ids, 2);
  const AdmmProblem problem(Matrix::Identity(2, 2), labels, 1.0);
  EXPECT_LE((update_q(Matrix::Identity(2, 2), problem) - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(update_q(Matrix::Zero(2, 2), problem), Matrix::Zero(2, 2));
}

TEST(UpdateQ, NormalEquationResidual) {
  std::mt19937_64 gen(29);
  const OneHotLabels labels(oracle::random_labels(gen, 3, 10), 3);
  const Matrix x = oracle::random_matrix(gen, 6, 10);
  const AdmmProblem problem(x, labels, 0.01);
  const Matrix t = oracle::random_matrix(gen, 3, 10);
  const Matrix q = update_q(t, problem);
  const Matrix a = x * x.transpose() + 0.01 * Matrix::Identity(6, 6);
  EXPECT_LE((q * a - t * x.transpose()).norm(), 1e-8);
}

TEST(Step, MultiplierFixedWhenFeasible) {
  std::mt19937_64 gen(30);
  const OneHotLabels labels = toy_labels();
  const AdmmProblem problem(oracle::random_matrix(gen, 3, 4), labels, 1.0);
  Hyperparams hp = unit_hp();
  hp.beta = 0.0;  // P = T + Y/mu, so T - P = 0 whenever Y = 0
  AdmmState s = initial_state(problem, hp);
  const AdmmState next = step(s, problem, hp);
  EXPECT_EQ(next.y, s.y);
  EXPECT_EQ(next.iter, 1u);
}

TEST(Step, PenaltyScheduleClosedForm) {
  std::mt19937_64 gen(31);
  const OneHotLabels labels = toy_labels();
  const AdmmProblem problem(oracle::random_matrix(gen, 3, 4), labels, 1.0);
  Hyperparams hp = unit_hp();
  hp.mu_max = 1e-3;
  AdmmState s = initial_state(problem, hp);
  for (int k = 1; k <= 60; ++k) {
    s = step(s, problem, hp);
    const double expected = std::min(hp.mu_max, hp.mu0 * std::pow(hp.rho, k));
    EXPECT_NEAR(s.mu, expected, 1e-12 * expected) << "after " << k << " steps";
  }
  EXPECT_EQ(s.mu, hp.mu_max);
}

TEST(Step, FirstStepFromInitialization) {
  std::mt19937_64 gen(32);
  const OneHotLabels labels = toy_labels();
  const AdmmProblem problem(oracle::random_matrix(gen, 3, 4), labels, 1.0);
  const Hyperparams hp = unit_hp();
  const AdmmState next = step(initial_state(problem, hp), problem, hp);
  // T = (alpha (H + B) + mu0 H) / (1 + alpha + gamma + mu0) with Q = 0, M = 1.
  const double hi = 0.666667777774074;     // (2 + 1e-5) / (3 + 1e-5)
  const double lo = -0.3333322222259259;   // -1 / (3 + 1e-5)
  Matrix expected(2, 4);
  expected << hi, hi, lo, lo, lo, lo, hi, hi;
  EXPECT_LE((next.t - expected).cwiseAbs().maxCoeff(), 1e-15);
  // beta / mu0 = 1e5 wipes P out entirely.
  EXPECT_EQ(next.p, Matrix::Zero(2, 4));
  EXPECT_LE((next.y - 1e-5 * expected).cwiseAbs().maxCoeff(), 1e-20);
  EXPECT_GE(next.m.m.minCoeff(), 0.0);
}

TEST(Step, NonFiniteBlockIsNamed) {
  std::mt19937_64 gen(33);
  const OneHotLabels labels = toy_labels();
  const AdmmProblem problem(oracle::random_matrix(gen, 3, 4), labels, 1.0);
  const Hyperparams hp = unit_hp();
  AdmmState s = initial_state(problem, hp);
  s.y(0, 0) = INFINITY;
  try {
    step(s, problem, hp);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("block T at iteration 1"), std::string::npos) << e.what();
  }
}

Dataset separable_two_class() {
  SynthSpec spec;
  spec.classes = 2;
  spec.per_class = 4;
  spec.dim = 4;
  spec.separation = 6.0;
  spec.seed = 5;
  return generate_synthetic(spec);
}

TEST(Fit, TinySeparableProblemConverges) {
  const Dataset ds = separable_two_class();
  const Matrix x = normalize_columns(ds.features);
  const TrainedModel model = fit_lrdlsr(x, OneHotLabels(ds.labels, 2), Hyperparams{});
  EXPECT_EQ(model.status, SolveStatus::Converged);
  EXPECT_LE(model.trace.records.back().residual, 1e-6);
  EXPECT_EQ(model.trace.records.size(), model.iterations);
  EXPECT_GE(model.m.minCoeff(), 0.0);
  EXPECT_EQ(model.projected_train, model.q * x);
}

TEST(Fit, ApproachesDlsrWithoutLowRankAndEnergyTerms) {
  // With beta = gamma = 0, eliminating T leaves the dragging regression with
  // ridge weight lambda (1 + alpha) / alpha. A slow penalty schedule keeps
  // the targets free long enough for the block updates to settle.
  std::mt19937_64 gen(34);
  for (int seed = 0; seed < 3; ++seed) {
    SynthSpec spec;
    spec.classes = 3;
    spec.per_class = 10;
    spec.dim = 8;
    spec.separation = 2.0;
    spec.seed = static_cast<std::uint64_t>(seed);
    const Dataset ds = generate_synthetic(spec);
    const Matrix x = normalize_columns(ds.features);
    const OneHotLabels labels(ds.labels, 3);
    Hyperparams hp;
    hp.alpha = 1.0;
    hp.beta = 0.0;
    hp.gamma = 0.0;
    hp.lambda = 0.1;
    hp.rho = 1.01;
    hp.max_iters = 5000;
    const TrainedModel admm = fit_lrdlsr(x, labels, hp);
    DlsrOptions opts;
    opts.lambda = hp.lambda * (1.0 + hp.alpha) / hp.alpha;
    opts.max_iters = 100000;
    opts.tol = 1e-14;
    const TrainedModel dlsr = fit_dlsr(x, labels, opts);
    EXPECT_LE((admm.q - dlsr.q).norm() / dlsr.q.norm(), 1e-3) << "seed " << seed;
  }
}

TEST(Fit, ObjectiveNonIncreasingAfterThirdIteration) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthSpec spec;
    spec.classes = 3;
    spec.per_class = 10;
    spec.dim = 8;
    spec.separation = 2.0;
    spec.seed = seed;
    const Dataset ds = generate_synthetic(spec);
    const TrainedModel model =
        fit_lrdlsr(normalize_columns(ds.features), OneHotLabels(ds.labels, 3), Hyperparams{});
    const auto& r = model.trace.records;
    for (std::size_t k = 3; k < r.size(); ++k) {
      EXPECT_LE(r[k].objective, r[k - 1].objective * (1.0 + 1e-10)) << "seed " << seed << " iter " << k + 1;
    }
  }
}

TEST(Fit, BitwiseDeterministic) {
  const Dataset ds = separable_two_class();
  const Matrix x = normalize_columns(ds.features);
  const OneHotLabels labels(ds.labels, 2);
  const TrainedModel a = fit_lrdlsr(x, labels, Hyperparams{});
  const TrainedModel b = fit_lrdlsr(x, labels, Hyperparams{});
  EXPECT_EQ(a.trace.to_csv(), b.trace.to_csv());
  EXPECT_EQ(a.q, b.q);
}

TEST(Fit, ZeroIterationsReturnsInitialState) {
  const Dataset ds = separable_two_class();
  Hyperparams hp;
  hp.max_iters = 0;
  const TrainedModel model = fit_lrdlsr(normalize_columns(ds.features), OneHotLabels(ds.labels, 2), hp);
  EXPECT_EQ(model.status, SolveStatus::MaxIters);
  EXPECT_EQ(model.iterations, 0u);
  EXPECT_EQ(model.q, Matrix::Zero(2, 4));
  EXPECT_TRUE(model.trace.records.empty());
}

TEST(Fit, FeasibilityOnlyRuleStopsAtOnceWithoutLowRankTerm) {
  // With beta = 0 the auxiliary copy equals T after every P update, so the
  // feasibility test alone is met after one iteration.
  const Dataset ds = separable_two_class();
  Hyperparams hp;
  hp.beta = 0.0;
  hp.stop_rule = StopRule::Feasibility;
  const Matrix x = normalize_columns(ds.features);
  const OneHotLabels labels(ds.labels, 2);
  EXPECT_EQ(fit_lrdlsr(x, labels, hp).iterations, 1u);
  hp.stop_rule = StopRule::FeasibilityAndStability;
  EXPECT_GT(fit_lrdlsr(x, labels, hp).iterations, 10u);
}

TEST(Fit, MaxItersStatus) {
  const Dataset ds = separable_two_class();
  Hyperparams hp;
  hp.max_iters = 5;
  const TrainedModel model = fit_lrdlsr(normalize_columns(ds.features), OneHotLabels(ds.labels, 2), hp);
  EXPECT_EQ(model.status, SolveStatus::MaxIters);
  EXPECT_EQ(model.iterations, 5u);
}

TEST(Hyperparams, Validation) {
  Hyperparams hp;
  EXPECT_NO_THROW(hp.validate());
  hp.rho = 1.0;
  EXPECT_THROW(hp.validate(), ParameterError);
  hp = {};
  hp.lambda = 0.0;
  EXPECT_THROW(hp.validate(), ParameterError);
  hp = {};
  hp.beta = -1.0;
  EXPECT_THROW(hp.validate(), ParameterError);
  hp = {};
  hp.tol = 0.0;
  EXPECT_THROW(hp.validate(), ParameterError);
}

}  // namespace
}  // namespace lrdlsr
