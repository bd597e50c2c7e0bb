#include "lrdlsr/models.hpp"

#include "lrdlsr/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace lrdlsr {

namespace {

void check_data(const Matrix& x, const OneHotLabels& labels) {
  if (x.cols() != labels.num_samples()) {
    throw DimensionError("data has " + std::to_string(x.cols()) + " samples but " +
                         std::to_string(labels.num_samples()) + " labels");
  }
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

OneHotLabels::OneHotLabels(std::span<const int> class_ids, int num_classes)
    : class_index_(class_ids.begin(), class_ids.end()) {
  if (num_classes < 1) throw ParameterError("labels: need at least one class");
  if (class_ids.empty()) throw ParameterError("labels: no samples");
  const auto n = static_cast<Index>(class_ids.size());
  h_ = Matrix::Zero(num_classes, n);
  class_counts_.assign(static_cast<std::size_t>(num_classes), 0);
  members_.resize(static_cast<std::size_t>(num_classes));
  for (Index j = 0; j < n; ++j) {
    const int k = class_ids[static_cast<std::size_t>(j)];
    if (k < 0 || k >= num_classes) {
      throw ParameterError("labels: class id " + std::to_string(k) + " outside [0, " +
                           std::to_string(num_classes) + ")");
    }
    h_(k, j) = 1.0;
    ++class_counts_[static_cast<std::size_t>(k)];
    members_[static_cast<std::size_t>(k)].push_back(j);
  }
  for (int k = 0; k < num_classes; ++k) {
    if (class_counts_[static_cast<std::size_t>(k)] == 0) {
      throw ParameterError("labels: class " + std::to_string(k) + " has no samples");
    }
  }
}

OneHotLabels OneHotLabels::from_ids(std::span<const int> class_ids) {
  if (class_ids.empty()) throw ParameterError("labels: no samples");
  return OneHotLabels(class_ids, *std::max_element(class_ids.begin(), class_ids.end()) + 1);
}

SignMatrix build_sign_matrix(const OneHotLabels& labels) {
  return {2.0 * labels.h().array() - 1.0};
}

Matrix relaxed_targets(const OneHotLabels& labels, const SignMatrix& b, const RelaxationMatrix& m) {
  return labels.h() + hadamard(b.b, m.m);
}

RelaxationMatrix update_m(const Matrix& t, const OneHotLabels& labels, const SignMatrix& b) {
  if (t.rows() != labels.h().rows() || t.cols() != labels.h().cols()) {
    throw DimensionError("update_m: targets must be " + std::to_string(labels.h().rows()) + "x" +
                         std::to_string(labels.h().cols()));
  }
  return {hadamard(b.b, t - labels.h()).cwiseMax(0.0)};
}

const char* to_string(SolveStatus status) {
  return status == SolveStatus::Converged ? "converged" : "max_iters";
}

std::string ConvergenceTrace::to_csv() const {
  std::string out = "iter,objective,lagrangian,residual,mu\n";
  for (const auto& r : records) {
    out += std::to_string(r.iter);
    for (double v : {r.objective, r.lagrangian, r.residual, r.mu}) {
      out += ',';
      append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

void ConvergenceTrace::write_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open trace file '" + path + "' for writing");
  os << to_csv();
  if (!os) throw DataError("failed writing trace file '" + path + "'");
}

TrainedModel fit_lsr(const Matrix& x, const OneHotLabels& labels, double lambda) {
  check_data(x, labels);
  TrainedModel model;
  model.q = RidgeSolver(x, lambda).solve_right(labels.h());
  model.t = labels.h();
  model.m = Matrix::Zero(labels.num_classes(), labels.num_samples());
  model.projected_train = model.q * x;
  model.train_labels = labels.class_index();
  model.status = SolveStatus::Converged;
  return model;
}

double dlsr_objective(const Matrix& q, const Matrix& x, const OneHotLabels& labels,
                      const SignMatrix& b, const RelaxationMatrix& m, double lambda) {
  return frobenius_norm_sq(q * x - relaxed_targets(labels, b, m)) + lambda * frobenius_norm_sq(q);
}

TrainedModel fit_dlsr(const Matrix& x, const OneHotLabels& labels, const DlsrOptions& options) {
  check_data(x, labels);
  if (!(options.tol >= 0.0)) throw ParameterError("dlsr: tol must be non-negative");
  if (options.max_iters == 0) throw ParameterError("dlsr: max_iters must be at least 1");
  const RidgeSolver ridge(x, options.lambda);
  const SignMatrix b = build_sign_matrix(labels);
  RelaxationMatrix m{Matrix::Zero(labels.num_classes(), labels.num_samples())};

  TrainedModel model;
  model.status = SolveStatus::MaxIters;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    model.q = ridge.solve_right(relaxed_targets(labels, b, m));
    model.projected_train = model.q * x;
    m = update_m(model.projected_train, labels, b);
    if (!model.q.allFinite() || !m.m.allFinite()) {
      throw NumericError("dlsr: non-finite values at iteration " + std::to_string(it));
    }
    const double obj = dlsr_objective(model.q, x, labels, b, m, options.lambda);
    const double decrease =
        std::isinf(previous) ? INFINITY : (previous - obj) / std::max(std::abs(previous), 1e-300);
    model.trace.records.push_back({it, obj, obj, decrease, 0.0});
    model.iterations = it;
    if (decrease < options.tol) {
      model.status = SolveStatus::Converged;
      break;
    }
    previous = obj;
  }
  model.t = relaxed_targets(labels, b, m);
  model.m = std::move(m.m);
  model.train_labels = labels.class_index();
  return model;
}

}  // namespace lrdlsr
