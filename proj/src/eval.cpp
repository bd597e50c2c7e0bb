#include "lrdlsr/eval.hpp"

#include "lrdlsr/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

namespace lrdlsr {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::json matrix_to_json(const Matrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows) throw DataError("model: matrix row count mismatch");
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != cols) throw DataError("model: ragged matrix row");
    for (Index k = 0; k < cols; ++k) a(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return a;
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::LSR: return "lsr";
    case Method::DLSR: return "dlsr";
    case Method::LRDLSR: return "lrdlsr";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "lsr") return Method::LSR;
  if (lower == "dlsr") return Method::DLSR;
  if (lower == "lrdlsr") return Method::LRDLSR;
  throw ParameterError("unknown method '" + name + "' (expected lsr, dlsr or lrdlsr)");
}

std::vector<int> nn_classify(const TrainedModel& model, const Matrix& test_features) {
  if (test_features.rows() != model.q.cols()) {
    throw DimensionError("nn_classify: test features have " + std::to_string(test_features.rows()) +
                         " rows, projection expects " + std::to_string(model.q.cols()));
  }
  const Matrix& train = model.projected_train;
  if (train.cols() == 0) throw DimensionError("nn_classify: model has no training samples");
  const Matrix projected = model.q * test_features;
  std::vector<int> predicted(static_cast<std::size_t>(projected.cols()));
  for (Index j = 0; j < projected.cols(); ++j) {
    Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < train.cols(); ++i) {
      const double dist = (train.col(i) - projected.col(j)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    predicted[static_cast<std::size_t>(j)] = model.train_labels.at(static_cast<std::size_t>(best));
  }
  return predicted;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DimensionError("accuracy: length mismatch");
  if (truth.empty()) throw DataError("accuracy: empty test set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

TrainedModel fit_method(Method method, const Matrix& x, const OneHotLabels& labels,
                        const Hyperparams& hp, const DlsrOptions& dlsr) {
  switch (method) {
    case Method::LSR: return fit_lsr(x, labels, hp.lambda);
    case Method::DLSR: return fit_dlsr(x, labels, dlsr);
    case Method::LRDLSR: return fit_lrdlsr(x, labels, hp);
  }
  throw ParameterError("unknown method");
}

void ExperimentConfig::validate(const Dataset& ds) const {
  if (repeats < 1) throw ParameterError("experiment: repeats must be at least 1");
  if (train_per_class.empty()) throw ParameterError("experiment: no train-per-class values");
  if (pca_energy && !(*pca_energy > 0.0 && *pca_energy <= 1.0)) {
    throw ParameterError("experiment: pca energy must lie in (0, 1]");
  }
  if (method == Method::LRDLSR) hp.validate();
  const auto sizes = ds.class_sizes();
  const std::size_t smallest = *std::min_element(sizes.begin(), sizes.end());
  for (std::size_t k : train_per_class) {
    if (k < 1 || k > smallest) {
      throw ParameterError("experiment: train-per-class " + std::to_string(k) +
                           " invalid for smallest class of " + std::to_string(smallest) + " samples");
    }
  }
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

bool TrialReport::complete() const {
  return std::all_of(trials.begin(), trials.end(), [](const TrialResult& t) { return t.completed; });
}

TrialReport run_experiment(const ExperimentConfig& cfg, const Dataset& ds) {
  ds.validate();
  cfg.validate(ds);
  const auto started = Clock::now();
  TrialReport report;
  for (std::size_t k : cfg.train_per_class) {
    GroupSummary group{k, {}, 0};
    std::vector<double> accuracies;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      const auto trial_start = Clock::now();
      TrialResult trial;
      trial.train_per_class = k;
      trial.repeat = r;
      trial.seed = cfg.base_seed + r;
      try {
        SplitResult parts = split(ds, {k, trial.seed});
        if (cfg.pca_energy) {
          const PcaModel pca = pca_fit(parts.train, *cfg.pca_energy);
          parts.train = pca_apply(pca, parts.train);
          parts.test = pca_apply(pca, parts.test);
        }
        const Matrix x = normalize_columns(parts.train.features);
        const Matrix y = normalize_columns(parts.test.features);
        const OneHotLabels labels(parts.train.labels, parts.train.num_classes());
        const TrainedModel model = fit_method(cfg.method, x, labels, cfg.hp, cfg.dlsr);
        if (cfg.trace_prefix) {
          model.trace.write_csv(*cfg.trace_prefix + "k" + std::to_string(k) + "_r" +
                                std::to_string(r) + ".csv");
        }
        trial.accuracy = accuracy(nn_classify(model, y), parts.test.labels);
        trial.status = model.status;
        trial.iterations = model.iterations;
        trial.completed = true;
        accuracies.push_back(trial.accuracy);
      } catch (const Error& e) {
        trial.error = e.what();
        ++group.failed;
      }
      trial.seconds = seconds_since(trial_start);
      report.trials.push_back(std::move(trial));
    }
    group.accuracy = summarize(accuracies);
    report.groups.push_back(group);
  }
  report.seconds = seconds_since(started);
  return report;
}

TrialReport run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, load_dataset(cfg.dataset_path));
}

std::string format_report(const ExperimentConfig& cfg, const TrialReport& report) {
  std::string out = "# lrdlsr experiment report\n";
  auto kv = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  kv("dataset", cfg.dataset_path);
  kv("method", to_string(cfg.method));
  kv("alpha", num(cfg.hp.alpha));
  kv("beta", num(cfg.hp.beta));
  kv("gamma", num(cfg.hp.gamma));
  kv("lambda", num(cfg.hp.lambda));
  kv("mu0", num(cfg.hp.mu0));
  kv("rho", num(cfg.hp.rho));
  kv("mu_max", num(cfg.hp.mu_max));
  kv("tol", num(cfg.method == Method::DLSR ? cfg.dlsr.tol : cfg.hp.tol));
  kv("max_iters",
     std::to_string(cfg.method == Method::DLSR ? cfg.dlsr.max_iters : cfg.hp.max_iters));
  kv("repeats", std::to_string(cfg.repeats));
  kv("base_seed", std::to_string(cfg.base_seed));
  kv("pca_energy", cfg.pca_energy ? num(*cfg.pca_energy) : "none");
  kv("complete", report.complete() ? "true" : "false");

  out += "\n[summary]\ntrain_per_class,mean_accuracy,std_accuracy,completed,failed\n";
  for (const auto& g : report.groups) {
    out += std::to_string(g.train_per_class) + "," + num(g.accuracy.mean) + "," +
           num(g.accuracy.std) + "," + std::to_string(g.accuracy.count) + "," +
           std::to_string(g.failed) + "\n";
  }
  out += "\n[trials]\ntrain_per_class,repeat,seed,completed,status,iterations,accuracy,error\n";
  for (const auto& t : report.trials) {
    std::string error = t.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out += std::to_string(t.train_per_class) + "," + std::to_string(t.repeat) + "," +
           std::to_string(t.seed) + "," + (t.completed ? "true" : "false") + "," +
           (t.completed ? to_string(t.status) : "failed") + "," + std::to_string(t.iterations) +
           "," + num(t.accuracy) + "," + error + "\n";
  }
  return out;
}

std::vector<GridCell> grid_search(const ExperimentConfig& cfg, const Dataset& ds,
                                  const std::vector<double>& alpha_grid,
                                  const std::vector<double>& beta_grid) {
  if (alpha_grid.empty() || beta_grid.empty()) throw ParameterError("grid: empty grid");
  if (cfg.train_per_class.size() != 1) {
    throw ParameterError("grid: exactly one train-per-class value is required");
  }
  std::vector<GridCell> cells;
  for (double alpha : alpha_grid) {
    for (double beta : beta_grid) {
      GridCell cell;
      cell.alpha = alpha;
      cell.beta = beta;
      ExperimentConfig cell_cfg = cfg;
      cell_cfg.hp.alpha = alpha;
      cell_cfg.hp.beta = beta;
      cell_cfg.trace_prefix.reset();
      try {
        const TrialReport report = run_experiment(cell_cfg, ds);
        cell.accuracy = report.groups.front().accuracy;
        cell.failed = report.groups.front().failed;
        for (const auto& t : report.trials) {
          if (!t.completed) {
            cell.error = t.error;
            break;
          }
        }
      } catch (const Error& e) {
        cell.failed = cfg.repeats;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string format_grid(const std::vector<GridCell>& cells) {
  std::string out = "alpha,beta,mean_accuracy,std_accuracy,completed,failed,status\n";
  for (const auto& c : cells) {
    const bool ok = c.failed == 0 && c.accuracy.count > 0;
    out += num(c.alpha) + "," + num(c.beta) + "," +
           (c.accuracy.count > 0 ? num(c.accuracy.mean) : std::string("nan")) + "," +
           (c.accuracy.count > 0 ? num(c.accuracy.std) : std::string("nan")) + "," +
           std::to_string(c.accuracy.count) + "," + std::to_string(c.failed) + "," +
           (ok ? "ok" : "failed") + "\n";
  }
  return out;
}

void save_model(const SavedModel& saved, const std::string& path) {
  const auto& m = saved.model;
  nlohmann::json j;
  j["format"] = "lrdlsr-model";
  j["version"] = 1;
  j["method"] = to_string(saved.method);
  j["hyperparams"] = {{"alpha", saved.hp.alpha}, {"beta", saved.hp.beta},
                      {"gamma", saved.hp.gamma}, {"lambda", saved.hp.lambda},
                      {"mu0", saved.hp.mu0},     {"rho", saved.hp.rho},
                      {"mu_max", saved.hp.mu_max}, {"tol", saved.hp.tol},
                      {"max_iters", saved.hp.max_iters},
                      {"stop_rule", saved.hp.stop_rule == StopRule::Feasibility ? "feasible" : "stable"}};
  j["status"] = to_string(m.status);
  j["iterations"] = m.iterations;
  j["class_names"] = saved.class_names;
  j["train_labels"] = m.train_labels;
  j["q"] = matrix_to_json(m.q);
  j["projected_train"] = matrix_to_json(m.projected_train);
  if (saved.pca) {
    j["pca"] = {{"mean", matrix_to_json(Matrix(saved.pca->mean))},
                {"basis", matrix_to_json(saved.pca->basis)},
                {"retained_energy", saved.pca->retained_energy}};
  }
  write_text_file(path, j.dump(1) + "\n");
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model '" + path + "'");
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format") != "lrdlsr-model") throw DataError("not an lrdlsr model file");
    SavedModel saved;
    saved.method = parse_method(j.at("method").get<std::string>());
    const auto& h = j.at("hyperparams");
    saved.hp.alpha = h.at("alpha").get<double>();
    saved.hp.beta = h.at("beta").get<double>();
    saved.hp.gamma = h.at("gamma").get<double>();
    saved.hp.lambda = h.at("lambda").get<double>();
    saved.hp.mu0 = h.at("mu0").get<double>();
    saved.hp.rho = h.at("rho").get<double>();
    saved.hp.mu_max = h.at("mu_max").get<double>();
    saved.hp.tol = h.at("tol").get<double>();
    saved.hp.max_iters = h.at("max_iters").get<std::size_t>();
    saved.hp.stop_rule = h.value("stop_rule", "stable") == "feasible" ? StopRule::Feasibility
                                                                      : StopRule::FeasibilityAndStability;
    saved.model.status = j.at("status") == "converged" ? SolveStatus::Converged : SolveStatus::MaxIters;
    saved.model.iterations = j.at("iterations").get<std::size_t>();
    saved.class_names = j.at("class_names").get<std::vector<std::string>>();
    saved.model.train_labels = j.at("train_labels").get<std::vector<int>>();
    saved.model.q = matrix_from_json(j.at("q"));
    saved.model.projected_train = matrix_from_json(j.at("projected_train"));
    if (saved.model.projected_train.cols() != static_cast<Index>(saved.model.train_labels.size())) {
      throw DataError("model: label count does not match projected samples");
    }
    if (j.contains("pca")) {
      const auto& p = j.at("pca");
      PcaModel pca;
      const Matrix mean = matrix_from_json(p.at("mean"));
      if (mean.cols() != 1) throw DataError("model: pca mean must be a column");
      pca.mean = mean.col(0);
      pca.basis = matrix_from_json(p.at("basis"));
      pca.retained_energy = p.at("retained_energy").get<double>();
      if (pca.basis.rows() != pca.mean.size() || pca.basis.cols() != saved.model.q.cols()) {
        throw DataError("model: pca shape does not match the projection");
      }
      saved.pca = std::move(pca);
    }
    return saved;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace lrdlsr
