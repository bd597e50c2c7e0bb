#pragma once

// Experiment harness: nearest-neighbour classification in the projected
// space, repeated random-split trials, (alpha, beta) grid search, report
// serialization and model persistence.

#include "lrdlsr/admm.hpp"
#include "lrdlsr/data.hpp"
#include "lrdlsr/models.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lrdlsr {

enum class Method { LSR, DLSR, LRDLSR };

const char* to_string(Method method);
/// Case-insensitive; throws ParameterError on unknown names.
Method parse_method(const std::string& name);

/// Projects each test column with Q and returns the class of the nearest
/// projected training sample. Ties go to the lowest training index.
std::vector<int> nn_classify(const TrainedModel& model, const Matrix& test_features);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Fits the configured method on already-normalized features.
TrainedModel fit_method(Method method, const Matrix& x, const OneHotLabels& labels,
                        const Hyperparams& hp, const DlsrOptions& dlsr);

struct ExperimentConfig {
  std::string dataset_path;
  Method method = Method::LRDLSR;
  Hyperparams hp;
  DlsrOptions dlsr;
  std::vector<std::size_t> train_per_class{10};
  std::size_t repeats = 10;
  std::uint64_t base_seed = 0;
  std::optional<double> pca_energy;
  /// When set, trial r at train size k writes `<prefix>k<k>_r<r>.csv`.
  std::optional<std::string> trace_prefix;

  void validate(const Dataset& ds) const;
};

struct TrialResult {
  std::size_t train_per_class = 0;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  bool completed = false;
  double accuracy = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  std::size_t iterations = 0;
  std::string error;
  double seconds = 0.0;
};

struct Summary {
  double mean = 0.0;
  /// Sample standard deviation (n - 1 divisor), 0 for a single value.
  double std = 0.0;
  std::size_t count = 0;
};

Summary summarize(const std::vector<double>& values);

struct GroupSummary {
  std::size_t train_per_class = 0;
  Summary accuracy;
  std::size_t failed = 0;
};

struct TrialReport {
  std::vector<TrialResult> trials;
  std::vector<GroupSummary> groups;
  double seconds = 0.0;

  bool complete() const;
};

/// One trial per (train size, repeat) with seed base_seed + repeat:
/// split, optional PCA fitted on the train part, unit-length normalization,
/// fit, nearest-neighbour accuracy on the test part. Trial failures are
/// recorded rather than thrown.
TrialReport run_experiment(const ExperimentConfig& cfg, const Dataset& ds);
TrialReport run_experiment(const ExperimentConfig& cfg);

/// Deterministic text report; excludes wall-clock timings.
std::string format_report(const ExperimentConfig& cfg, const TrialReport& report);

struct GridCell {
  double alpha = 0.0;
  double beta = 0.0;
  Summary accuracy;
  std::size_t failed = 0;
  std::string error;
};

/// run_experiment for every (alpha, beta) pair, alpha-major order, with the
/// remaining hyperparameters taken from cfg. Requires a single train size.
std::vector<GridCell> grid_search(const ExperimentConfig& cfg, const Dataset& ds,
                                  const std::vector<double>& alpha_grid,
                                  const std::vector<double>& beta_grid);

/// Header `alpha,beta,mean_accuracy,std_accuracy,completed,failed,status`.
std::string format_grid(const std::vector<GridCell>& cells);

struct SavedModel {
  Method method = Method::LRDLSR;
  Hyperparams hp;
  TrainedModel model;
  std::vector<std::string> class_names;
  /// Projection fitted before training; predict applies it to new samples.
  std::optional<PcaModel> pca;
};

void save_model(const SavedModel& saved, const std::string& path);
SavedModel load_model(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace lrdlsr
