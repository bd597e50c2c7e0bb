#include "lrdlsr/admm.hpp"
#include "lrdlsr/data.hpp"
#include "lrdlsr/errors.hpp"
#include "lrdlsr/eval.hpp"
#include "lrdlsr/matrix_core.hpp"
#include "lrdlsr/models.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

namespace py = pybind11;
using namespace lrdlsr;

namespace {

// Python callers pass plain 0-based class ids; the class count is inferred.
OneHotLabels make_labels(const std::vector<int>& ids) {
  if (ids.empty()) throw ParameterError("labels must not be empty");
  return OneHotLabels(ids, *std::max_element(ids.begin(), ids.end()) + 1);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low-rank discriminative least squares regression";

  auto base = py::register_exception<Error>(m, "LrdlsrError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::enum_<StopRule>(m, "StopRule")
      .value("FEASIBILITY", StopRule::Feasibility)
      .value("FEASIBILITY_AND_STABILITY", StopRule::FeasibilityAndStability);
  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("CONVERGED", SolveStatus::Converged)
      .value("MAX_ITERS", SolveStatus::MaxIters);
  py::enum_<Method>(m, "Method")
      .value("LSR", Method::LSR)
      .value("DLSR", Method::DLSR)
      .value("LRDLSR", Method::LRDLSR);

  // Linear algebra.
  m.def("svd", [](const Matrix& a) {
    const SvdFactors f = svd(a);
    return py::make_tuple(f.u, f.singular_values, f.v);
  }, py::arg("a"), "Thin SVD, returns (U, s, V) with A = U diag(s) V^T.");
  m.def("svt", &svt, py::arg("theta"), py::arg("zeta"), "Singular value thresholding.");
  m.def("nuclear_norm", &nuclear_norm, py::arg("a"));
  m.def("normalize_columns", py::overload_cast<const Matrix&>(&normalize_columns), py::arg("x"));

  // Models.
  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init([](double alpha, double beta, double gamma, double lambda, double mu0, double rho,
                       double mu_max, double tol, std::size_t max_iters, StopRule stop_rule) {
             return Hyperparams{alpha, beta, gamma, lambda, mu0, rho, mu_max, tol, max_iters, stop_rule};
           }),
           py::arg("alpha") = 0.1, py::arg("beta") = 0.01, py::arg("gamma") = 0.01,
           py::arg("lambda_") = 0.01, py::arg("mu0") = 1e-5, py::arg("rho") = 1.1,
           py::arg("mu_max") = 1e8, py::arg("tol") = 1e-6, py::arg("max_iters") = 500,
           py::arg("stop_rule") = StopRule::FeasibilityAndStability)
      .def_readwrite("alpha", &Hyperparams::alpha)
      .def_readwrite("beta", &Hyperparams::beta)
      .def_readwrite("gamma", &Hyperparams::gamma)
      .def_readwrite("lambda_", &Hyperparams::lambda)
      .def_readwrite("mu0", &Hyperparams::mu0)
      .def_readwrite("rho", &Hyperparams::rho)
      .def_readwrite("mu_max", &Hyperparams::mu_max)
      .def_readwrite("tol", &Hyperparams::tol)
      .def_readwrite("max_iters", &Hyperparams::max_iters)
      .def_readwrite("stop_rule", &Hyperparams::stop_rule)
      .def("validate", &Hyperparams::validate);

  py::class_<DlsrOptions>(m, "DlsrOptions")
      .def(py::init([](double lambda, std::size_t max_iters, double tol) {
             return DlsrOptions{lambda, max_iters, tol};
           }),
           py::arg("lambda_") = 0.01, py::arg("max_iters") = 100, py::arg("tol") = 1e-6)
      .def_readwrite("lambda_", &DlsrOptions::lambda)
      .def_readwrite("max_iters", &DlsrOptions::max_iters)
      .def_readwrite("tol", &DlsrOptions::tol);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iter", &TraceRecord::iter)
      .def_readonly("objective", &TraceRecord::objective)
      .def_readonly("lagrangian", &TraceRecord::lagrangian)
      .def_readonly("residual", &TraceRecord::residual)
      .def_readonly("mu", &TraceRecord::mu);

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_readonly("q", &TrainedModel::q)
      .def_readonly("t", &TrainedModel::t)
      .def_readonly("m", &TrainedModel::m)
      .def_readonly("projected_train", &TrainedModel::projected_train)
      .def_readonly("train_labels", &TrainedModel::train_labels)
      .def_readonly("status", &TrainedModel::status)
      .def_readonly("iterations", &TrainedModel::iterations)
      .def_property_readonly("trace", [](const TrainedModel& t) { return t.trace.records; })
      .def("trace_csv", [](const TrainedModel& t) { return t.trace.to_csv(); })
      .def("predict", [](const TrainedModel& t, const Matrix& x) { return nn_classify(t, x); },
           py::arg("x"));

  m.def("fit_lsr", [](const Matrix& x, const std::vector<int>& labels, double lambda) {
    return fit_lsr(x, make_labels(labels), lambda);
  }, py::arg("x"), py::arg("labels"), py::arg("lambda_") = 0.01);
  m.def("fit_dlsr", [](const Matrix& x, const std::vector<int>& labels, const DlsrOptions& opts) {
    return fit_dlsr(x, make_labels(labels), opts);
  }, py::arg("x"), py::arg("labels"), py::arg("options") = DlsrOptions{});
  m.def("fit_lrdlsr", [](const Matrix& x, const std::vector<int>& labels, const Hyperparams& hp) {
    py::gil_scoped_release release;
    return fit_lrdlsr(x, make_labels(labels), hp);
  }, py::arg("x"), py::arg("labels"), py::arg("hyperparams") = Hyperparams{});
  m.def("nn_classify", &nn_classify, py::arg("model"), py::arg("x"));
  m.def("accuracy", &accuracy, py::arg("predicted"), py::arg("truth"));

  // Data.
  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const Matrix& features, const std::vector<int>& labels,
                       const std::vector<std::string>& class_names) {
             Dataset ds{features, labels, class_names};
             ds.validate();
             return ds;
           }),
           py::arg("features"), py::arg("labels"), py::arg("class_names"))
      .def_readonly("features", &Dataset::features)
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("class_names", &Dataset::class_names)
      .def_property_readonly("dim", &Dataset::dim)
      .def_property_readonly("size", &Dataset::size)
      .def_property_readonly("num_classes", &Dataset::num_classes)
      .def("class_sizes", &Dataset::class_sizes);

  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));

  py::class_<SplitResult>(m, "SplitResult")
      .def_readonly("train", &SplitResult::train)
      .def_readonly("test", &SplitResult::test)
      .def_readonly("train_indices", &SplitResult::train_indices)
      .def_readonly("test_indices", &SplitResult::test_indices);
  m.def("split", [](const Dataset& ds, std::size_t train_per_class, std::uint64_t seed) {
    return split(ds, SplitSpec{train_per_class, seed});
  }, py::arg("dataset"), py::arg("train_per_class"), py::arg("seed") = 0);

  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("basis", &PcaModel::basis)
      .def_readonly("retained_energy", &PcaModel::retained_energy)
      .def_property_readonly("components", &PcaModel::components);
  m.def("pca_fit", &pca_fit, py::arg("dataset"), py::arg("energy"));
  m.def("pca_apply", &pca_apply, py::arg("model"), py::arg("dataset"));

  m.def("generate_synthetic",
        [](int classes, std::size_t per_class, Index dim, double separation, double correlation,
           Index correlation_rank, std::uint64_t seed) {
          return generate_synthetic(
              SynthSpec{classes, per_class, dim, separation, correlation, correlation_rank, seed});
        },
        py::arg("classes") = 3, py::arg("per_class") = 20, py::arg("dim") = 10,
        py::arg("separation") = 3.0, py::arg("correlation") = 0.0, py::arg("correlation_rank") = 2,
        py::arg("seed") = 0);

  // Experiments.
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("dataset_path", &ExperimentConfig::dataset_path)
      .def_readwrite("method", &ExperimentConfig::method)
      .def_readwrite("hyperparams", &ExperimentConfig::hp)
      .def_readwrite("dlsr", &ExperimentConfig::dlsr)
      .def_readwrite("train_per_class", &ExperimentConfig::train_per_class)
      .def_readwrite("repeats", &ExperimentConfig::repeats)
      .def_readwrite("base_seed", &ExperimentConfig::base_seed)
      .def_readwrite("pca_energy", &ExperimentConfig::pca_energy)
      .def_readwrite("trace_prefix", &ExperimentConfig::trace_prefix);

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("train_per_class", &TrialResult::train_per_class)
      .def_readonly("repeat", &TrialResult::repeat)
      .def_readonly("seed", &TrialResult::seed)
      .def_readonly("completed", &TrialResult::completed)
      .def_readonly("accuracy", &TrialResult::accuracy)
      .def_readonly("status", &TrialResult::status)
      .def_readonly("iterations", &TrialResult::iterations)
      .def_readonly("error", &TrialResult::error);
  py::class_<Summary>(m, "Summary")
      .def_readonly("mean", &Summary::mean)
      .def_readonly("std", &Summary::std)
      .def_readonly("count", &Summary::count);
  py::class_<GroupSummary>(m, "GroupSummary")
      .def_readonly("train_per_class", &GroupSummary::train_per_class)
      .def_readonly("accuracy", &GroupSummary::accuracy)
      .def_readonly("failed", &GroupSummary::failed);
  py::class_<TrialReport>(m, "TrialReport")
      .def_readonly("trials", &TrialReport::trials)
      .def_readonly("groups", &TrialReport::groups)
      .def("complete", &TrialReport::complete);
  py::class_<GridCell>(m, "GridCell")
      .def_readonly("alpha", &GridCell::alpha)
      .def_readonly("beta", &GridCell::beta)
      .def_readonly("accuracy", &GridCell::accuracy)
      .def_readonly("failed", &GridCell::failed)
      .def_readonly("error", &GridCell::error);

  m.def("run_experiment", [](const ExperimentConfig& cfg, const Dataset& ds) {
    py::gil_scoped_release release;
    return run_experiment(cfg, ds);
  }, py::arg("config"), py::arg("dataset"));
  m.def("format_report", &format_report, py::arg("config"), py::arg("report"));
  m.def("grid_search", [](const ExperimentConfig& cfg, const Dataset& ds, const std::vector<double>& alphas,
                          const std::vector<double>& betas) {
    py::gil_scoped_release release;
    return grid_search(cfg, ds, alphas, betas);
  }, py::arg("config"), py::arg("dataset"), py::arg("alpha_grid"), py::arg("beta_grid"));
  m.def("format_grid", &format_grid, py::arg("cells"));
}
