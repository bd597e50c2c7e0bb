#pragma once

// Label machinery and the two baseline regressors: plain least squares
// regression (LSR) and LSR with epsilon-dragging relaxed targets (DLSR).

#include "lrdlsr/matrix_core.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lrdlsr {

/// One-hot c x n label matrix H together with its per-class bookkeeping.
/// Class ids are 0-based and contiguous.
class OneHotLabels {
 public:
  /// Throws ParameterError if an id is outside [0, num_classes) or a class is
  /// empty.
  OneHotLabels(std::span<const int> class_ids, int num_classes);

  /// Infers num_classes as max id + 1.
  static OneHotLabels from_ids(std::span<const int> class_ids);

  const Matrix& h() const { return h_; }
  Index num_classes() const { return h_.rows(); }
  Index num_samples() const { return h_.cols(); }
  const std::vector<int>& class_index() const { return class_index_; }
  const std::vector<std::size_t>& class_counts() const { return class_counts_; }
  /// Column indices (ascending) of the samples of class k.
  const std::vector<Index>& members(int k) const { return members_.at(static_cast<std::size_t>(k)); }

 private:
  Matrix h_;
  std::vector<int> class_index_;
  std::vector<std::size_t> class_counts_;
  std::vector<std::vector<Index>> members_;
};

/// B with +1 where H is 1 and -1 elsewhere.
struct SignMatrix {
  Matrix b;
};

/// Non-negative dragging magnitudes M.
struct RelaxationMatrix {
  Matrix m;
};

SignMatrix build_sign_matrix(const OneHotLabels& labels);

/// H + B (.) M.
Matrix relaxed_targets(const OneHotLabels& labels, const SignMatrix& b, const RelaxationMatrix& m);

/// Minimizer of ||T - (H + B (.) M)||_F^2 over M >= 0: max(B (.) (T - H), 0).
RelaxationMatrix update_m(const Matrix& t, const OneHotLabels& labels, const SignMatrix& b);

enum class SolveStatus { Converged, MaxIters };

const char* to_string(SolveStatus status);

/// One solver iteration worth of telemetry.
struct TraceRecord {
  std::size_t iter = 0;
  double objective = 0.0;
  double lagrangian = 0.0;
  double residual = 0.0;
  double mu = 0.0;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;

  /// Header `iter,objective,lagrangian,residual,mu`, one row per record,
  /// values in shortest round-trip decimal form.
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

/// Fitted linear projection plus everything nearest-neighbour classification
/// needs.
struct TrainedModel {
  Matrix q;                      // c x d
  Matrix t;                      // c x n final regression targets
  Matrix m;                      // c x n dragging magnitudes (zero for LSR)
  Matrix projected_train;        // q * x
  std::vector<int> train_labels; // class id of each projected column
  ConvergenceTrace trace;
  SolveStatus status = SolveStatus::Converged;
  std::size_t iterations = 0;
};

/// Closed form Q = H X^T (X X^T + lambda I)^{-1}.
TrainedModel fit_lsr(const Matrix& x, const OneHotLabels& labels, double lambda);

/// ||Q X - (H + B (.) M)||_F^2 + lambda ||Q||_F^2.
double dlsr_objective(const Matrix& q, const Matrix& x, const OneHotLabels& labels,
                      const SignMatrix& b, const RelaxationMatrix& m, double lambda);

struct DlsrOptions {
  double lambda = 0.01;
  std::size_t max_iters = 100;
  /// Stop once the relative objective decrease falls below this.
  double tol = 1e-6;
};

/// Alternates the Q and M block minimizations starting from M = 0, Q first.
/// Trace rows carry the objective in both value columns, the relative
/// decrease as residual and mu = 0.
TrainedModel fit_dlsr(const Matrix& x, const OneHotLabels& labels, const DlsrOptions& options);

}  // namespace lrdlsr
