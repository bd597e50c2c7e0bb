"""Low-rank discriminative least squares regression classifiers."""

from ._core import (
    DataError,
    Dataset,
    DimensionError,
    DlsrOptions,
    ExperimentConfig,
    Hyperparams,
    LrdlsrError,
    Method,
    NumericError,
    ParameterError,
    SolveStatus,
    StopRule,
    accuracy,
    fit_dlsr,
    fit_lrdlsr,
    fit_lsr,
    format_grid,
    format_report,
    generate_synthetic,
    grid_search,
    load_dataset,
    nn_classify,
    normalize_columns,
    nuclear_norm,
    pca_apply,
    pca_fit,
    run_experiment,
    save_dataset,
    split,
    svd,
    svt,
)

__all__ = [name for name in dir() if not name.startswith("_")]
