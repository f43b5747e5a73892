"""Hierarchical linear-noise-approximation inference for single-cell expression time series."""

from ._core import (
    CellSeries,
    NumericalError,
    Dataset,
    FitResult,
    SummaryRow,
    TranscriptionParams,
    TranslationParams,
    fit,
    gamma_mode,
    kalman_filter,
    lna_loglik,
    read_dataset,
    simulate_study,
    simulate_trajectory,
    write_dataset,
)

__all__ = [
    "CellSeries",
    "NumericalError",
    "Dataset",
    "FitResult",
    "SummaryRow",
    "TranscriptionParams",
    "TranslationParams",
    "fit",
    "gamma_mode",
    "kalman_filter",
    "lna_loglik",
    "read_dataset",
    "simulate_study",
    "simulate_trajectory",
    "write_dataset",
]
