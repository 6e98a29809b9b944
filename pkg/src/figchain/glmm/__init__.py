"""Logistic mixed model with crossed random intercepts for participants
and items, fit by Laplace approximation."""
from .data import GlmmDataset, center_pretest, dataset_from_records
from .estimate import (
    FitOptions,
    FitResult,
    InnerSolution,
    fit,
    joint_mode,
    laplace_loglik,
)
from .summary import ComparisonReport, report, report_from_coefficients, wald

__all__ = [
    "GlmmDataset",
    "center_pretest",
    "dataset_from_records",
    "FitOptions",
    "FitResult",
    "InnerSolution",
    "fit",
    "joint_mode",
    "laplace_loglik",
    "ComparisonReport",
    "report",
    "report_from_coefficients",
    "wald",
]
