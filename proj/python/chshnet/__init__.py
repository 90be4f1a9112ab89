"""CHSH statistics for two-head networks trained under four task contexts.

Thin wrapper over the compiled extension; see the individual function
docstrings for the operations.
"""

from ._core import (
    NumericError,
    DataError,
    chsh_s,
    tsirelson_bound,
    lhv_enumerate,
    outcomes,
    correlation,
    pearson,
    derive_seed,
    enumerate_dataset,
    run_contexts,
    sweep,
    epoch_trace,
    mean_slope,
    loss_oscillation,
    conflict_fractions,
    ingest_report,
    __version__,
)

__all__ = [
    "NumericError",
    "DataError",
    "chsh_s",
    "tsirelson_bound",
    "lhv_enumerate",
    "outcomes",
    "correlation",
    "pearson",
    "derive_seed",
    "enumerate_dataset",
    "run_contexts",
    "sweep",
    "epoch_trace",
    "mean_slope",
    "loss_oscillation",
    "conflict_fractions",
    "ingest_report",
    "__version__",
]
