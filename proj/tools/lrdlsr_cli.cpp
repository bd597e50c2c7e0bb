// Command line front end: fit, eval, grid, predict and gen-synth.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include "lrdlsr/admm.hpp"
#include "lrdlsr/data.hpp"
#include "lrdlsr/errors.hpp"
#include "lrdlsr/eval.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace lrdlsr;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct SolverFlags {
  std::string method = "lrdlsr";
  Hyperparams hp;
  std::optional<double> tol;
  std::optional<std::size_t> max_iters;
  std::string stop_rule = "stable";

  void add_to(CLI::App& cmd, bool with_method = true) {
    if (with_method) {
      cmd.add_option("--method", method, "lsr, dlsr or lrdlsr")
          ->check(CLI::IsMember({"lsr", "dlsr", "lrdlsr"}, CLI::ignore_case))
          ->capture_default_str();
    }
    cmd.add_option("--alpha", hp.alpha, "weight of the relaxed-target fit term")->capture_default_str();
    cmd.add_option("--beta", hp.beta, "weight of the class-wise nuclear norm")->capture_default_str();
    cmd.add_option("--gamma", hp.gamma, "weight of the target energy term")->capture_default_str();
    cmd.add_option("--lambda", hp.lambda, "ridge weight on the projection")->capture_default_str();
    cmd.add_option("--mu0", hp.mu0, "initial ADMM penalty")->capture_default_str();
    cmd.add_option("--rho", hp.rho, "ADMM penalty growth factor")->capture_default_str();
    cmd.add_option("--mu-max", hp.mu_max, "ADMM penalty cap")->capture_default_str();
    cmd.add_option("--tol", tol, "stopping tolerance (lrdlsr default 1e-6, dlsr default 1e-6)");
    cmd.add_option("--max-iters", max_iters, "iteration cap (lrdlsr default 500, dlsr default 100)");
    cmd.add_option("--stop-rule", stop_rule,
                   "lrdlsr stop rule: 'stable' (feasible and targets settled) or 'feasible'")
        ->check(CLI::IsMember({"stable", "feasible"}))
        ->capture_default_str();
  }

  Method resolved_method() const { return parse_method(method); }

  Hyperparams resolved_hp() const {
    Hyperparams out = hp;
    if (tol) out.tol = *tol;
    if (max_iters) out.max_iters = *max_iters;
    out.stop_rule = stop_rule == "feasible" ? StopRule::Feasibility : StopRule::FeasibilityAndStability;
    return out;
  }

  DlsrOptions resolved_dlsr() const {
    DlsrOptions out;
    out.lambda = hp.lambda;
    if (tol) out.tol = *tol;
    if (max_iters) out.max_iters = *max_iters;
    return out;
  }
};

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : CLI::detail::split(text, ',')) {
    const std::string token = CLI::detail::trim_copy(item);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size()) {
      throw ParameterError("invalid train-per-class value '" + token + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

int run_fit(const std::string& data_path, const SolverFlags& flags,
            const std::optional<double>& pca_energy, const std::string& out_path,
            const std::string& trace_path) {
  Dataset ds = load_dataset(data_path);
  std::optional<PcaModel> pca;
  if (pca_energy) {
    pca = pca_fit(ds, *pca_energy);
    ds = pca_apply(*pca, ds);
  }
  const auto normalized = normalize_columns(ds);
  if (!normalized.zero_columns.empty()) {
    std::cerr << "warning: " << normalized.zero_columns.size()
              << " all-zero samples left unnormalized\n";
  }
  const OneHotLabels labels(ds.labels, ds.num_classes());
  const Method method = flags.resolved_method();
  const Hyperparams hp = flags.resolved_hp();
  SavedModel saved{method, hp,
                   fit_method(method, normalized.dataset.features, labels, hp, flags.resolved_dlsr()),
                   ds.class_names, pca};
  if (!out_path.empty()) save_model(saved, out_path);
  if (!trace_path.empty()) saved.model.trace.write_csv(trace_path);
  const double train_acc = accuracy(nn_classify(saved.model, normalized.dataset.features), ds.labels);
  std::cout << "method=" << to_string(method) << " status=" << to_string(saved.model.status)
            << " iterations=" << saved.model.iterations << " train_accuracy=" << train_acc << "\n";
  return kOk;
}

int run_predict(const std::string& model_path, const std::string& data_path) {
  const SavedModel saved = load_model(model_path);
  const Dataset ds = load_dataset(data_path);
  const Matrix y = normalize_columns(saved.pca ? pca_apply(*saved.pca, ds).features : ds.features);
  const std::vector<int> predicted = nn_classify(saved.model, y);
  std::size_t hits = 0;
  for (std::size_t j = 0; j < predicted.size(); ++j) {
    const std::string& name = saved.class_names.at(static_cast<std::size_t>(predicted[j]));
    const std::string& truth = ds.class_names[static_cast<std::size_t>(ds.labels[j])];
    hits += name == truth;
    std::cout << name << "\n";
  }
  std::cerr << "accuracy=" << static_cast<double>(hits) / static_cast<double>(predicted.size())
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank discriminative least squares regression toolkit"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a model on a whole dataset");
  std::string fit_data, fit_out, fit_trace;
  std::optional<double> fit_pca;
  SolverFlags fit_flags;
  fit->add_option("--data", fit_data, "dataset file")->required();
  fit_flags.add_to(*fit);
  fit->add_option("--pca-energy", fit_pca, "retain this share of PCA energy before fitting");
  fit->add_option("--out", fit_out, "model output path (JSON)");
  fit->add_option("--trace", fit_trace, "convergence trace CSV path");

  // eval
  auto* eval = app.add_subcommand("eval", "Repeated random-split evaluation");
  ExperimentConfig eval_cfg;
  std::string eval_sizes = "10", eval_report, eval_trace_prefix;
  std::optional<double> eval_pca;
  SolverFlags eval_flags;
  bool eval_no_traces = false;
  eval->add_option("--data", eval_cfg.dataset_path, "dataset file")->required();
  eval_flags.add_to(*eval);
  eval->add_option("--train-per-class", eval_sizes, "comma-separated train sizes per class")
      ->capture_default_str();
  eval->add_option("--repeats", eval_cfg.repeats, "random splits per train size")->capture_default_str();
  eval->add_option("--seed", eval_cfg.base_seed, "base seed; trial r uses seed + r")->capture_default_str();
  eval->add_option("--pca-energy", eval_pca, "PCA energy share fitted on each train split");
  eval->add_option("--report", eval_report, "report output path")->required();
  eval->add_option("--trace-prefix", eval_trace_prefix,
                   "prefix for per-trial trace CSVs (default: <report>.trace_)");
  eval->add_flag("--no-traces", eval_no_traces, "do not write per-trial traces");

  // grid
  auto* grid = app.add_subcommand("grid", "Grid search over alpha and beta");
  ExperimentConfig grid_cfg;
  std::vector<double> alpha_grid{1e-4, 1e-3, 1e-2, 1e-1, 1}, beta_grid{1e-4, 1e-3, 1e-2, 1e-1, 1};
  std::string grid_sizes = "10", grid_out;
  std::optional<double> grid_pca;
  SolverFlags grid_flags;
  grid->add_option("--data", grid_cfg.dataset_path, "dataset file")->required();
  grid->add_option("--alpha-grid", alpha_grid, "comma-separated alpha values")->delimiter(',');
  grid->add_option("--beta-grid", beta_grid, "comma-separated beta values")->delimiter(',');
  grid_flags.add_to(*grid, false);
  grid->add_option("--train-per-class", grid_sizes, "train size per class")->capture_default_str();
  grid->add_option("--repeats", grid_cfg.repeats, "random splits per cell")->capture_default_str();
  grid->add_option("--seed", grid_cfg.base_seed, "base seed")->capture_default_str();
  grid->add_option("--pca-energy", grid_pca, "PCA energy share fitted on each train split");
  grid->add_option("--out", grid_out, "accuracy table output path")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "Classify samples with a saved model");
  std::string predict_model, predict_data;
  predict->add_option("--model", predict_model, "model written by fit --out")->required();
  predict->add_option("--data", predict_data, "dataset file")->required();

  // gen-synth
  auto* synth = app.add_subcommand("gen-synth", "Write a synthetic Gaussian-cluster dataset");
  SynthSpec synth_spec;
  std::string synth_out;
  synth->add_option("--classes", synth_spec.classes, "number of classes")->capture_default_str();
  synth->add_option("--per-class", synth_spec.per_class, "samples per class")->capture_default_str();
  synth->add_option("--dim", synth_spec.dim, "feature dimension")->capture_default_str();
  synth->add_option("--separation", synth_spec.separation, "class mean norm in noise std units")
      ->capture_default_str();
  synth->add_option("--correlation", synth_spec.correlation,
                    "share of noise variance in a class-specific low-rank subspace")
      ->capture_default_str();
  synth->add_option("--correlation-rank", synth_spec.correlation_rank, "rank of that subspace")
      ->capture_default_str();
  synth->add_option("--seed", synth_spec.seed, "generator seed")->capture_default_str();
  synth->add_option("--out", synth_out, "output dataset path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*fit) return run_fit(fit_data, fit_flags, fit_pca, fit_out, fit_trace);
    if (*predict) return run_predict(predict_model, predict_data);
    if (*synth) {
      save_dataset(generate_synthetic(synth_spec), synth_out);
      return kOk;
    }
    if (*eval) {
      eval_cfg.method = eval_flags.resolved_method();
      eval_cfg.hp = eval_flags.resolved_hp();
      eval_cfg.dlsr = eval_flags.resolved_dlsr();
      eval_cfg.train_per_class = parse_sizes(eval_sizes);
      eval_cfg.pca_energy = eval_pca;
      if (!eval_no_traces) {
        eval_cfg.trace_prefix = eval_trace_prefix.empty() ? eval_report + ".trace_" : eval_trace_prefix;
      }
      const Dataset ds = load_dataset(eval_cfg.dataset_path);
      const TrialReport report = run_experiment(eval_cfg, ds);
      write_text_file(eval_report, format_report(eval_cfg, report));
      for (const auto& g : report.groups) {
        std::cout << "train_per_class=" << g.train_per_class << " accuracy=" << g.accuracy.mean
                  << " +- " << g.accuracy.std << " (" << g.accuracy.count << " trials, "
                  << g.failed << " failed)\n";
      }
      std::cerr << "elapsed_seconds=" << report.seconds << "\n";
      return report.complete() ? kOk : kNumeric;
    }
    if (*grid) {
      grid_cfg.method = Method::LRDLSR;
      grid_cfg.hp = grid_flags.resolved_hp();
      grid_cfg.train_per_class = parse_sizes(grid_sizes);
      grid_cfg.pca_energy = grid_pca;
      const Dataset ds = load_dataset(grid_cfg.dataset_path);
      const auto cells = grid_search(grid_cfg, ds, alpha_grid, beta_grid);
      write_text_file(grid_out, format_grid(cells));
      std::cout << cells.size() << " cells written to " << grid_out << "\n";
      return kOk;
    }
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
