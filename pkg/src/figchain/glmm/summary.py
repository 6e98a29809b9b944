"""Wald inference and the version-comparison report."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import FIXED_EFFECT_NAMES
from .estimate import FitOptions, FitResult

ALPHA = 0.05


def normal_two_sided_p(z: float) -> float:
    """p = 2 * Phi(-|z|) via the complementary error function."""
    return math.erfc(abs(z) / math.sqrt(2.0))


def wald(fit: FitResult) -> list[tuple[float, float]]:
    """Per-coefficient (z, p); requires a converged fit."""
    out = []
    for estimate, se in zip(fit.beta, fit.beta_se):
        z = estimate / se
        out.append((float(z), normal_two_sided_p(z)))
    return out


@dataclass
class CoefficientSummary:
    name: str
    estimate: float
    se: float
    z: float
    p: float
    odds_ratio: float
    pct_odds_change: float
    significant: bool

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "estimate": self.estimate,
            "se": self.se,
            "z": self.z,
            "p": self.p,
            "odds_ratio": self.odds_ratio,
            "pct_odds_change": self.pct_odds_change,
            "significant": self.significant,
        }


@dataclass
class ComparisonReport:
    coefficients: list[CoefficientSummary]
    baseline_probability: float
    version_probability: float
    version_effect_consistent: bool  # interaction not significant at alpha
    sigma_u: float
    sigma_v: float
    loglik: float
    converged: bool

    def to_json(self) -> dict:
        return {
            "coefficients": [c.to_json() for c in self.coefficients],
            "baseline_probability": self.baseline_probability,
            "version_probability": self.version_probability,
            "version_effect_consistent": self.version_effect_consistent,
            "sigma_u": self.sigma_u,
            "sigma_v": self.sigma_v,
            "loglik": self.loglik,
            "converged": self.converged,
        }


def report(fit: FitResult) -> ComparisonReport:
    """Odds ratios, reference probabilities, and significance flags."""
    tests = wald(fit)
    coefficients = []
    for name, estimate, se, (z, p) in zip(
        FIXED_EFFECT_NAMES, fit.beta, fit.beta_se, tests
    ):
        odds_ratio = math.exp(estimate)
        coefficients.append(
            CoefficientSummary(
                name=name,
                estimate=float(estimate),
                se=float(se),
                z=z,
                p=p,
                odds_ratio=odds_ratio,
                pct_odds_change=(odds_ratio - 1.0) * 100.0,
                significant=p < ALPHA,
            )
        )
    baseline = float(expit(fit.beta[0]))
    version = float(expit(fit.beta[0] + fit.beta[1]))
    interaction_p = tests[3][1]
    return ComparisonReport(
        coefficients=coefficients,
        baseline_probability=baseline,
        version_probability=version,
        version_effect_consistent=interaction_p >= ALPHA,
        sigma_u=fit.sigma_u,
        sigma_v=fit.sigma_v,
        loglik=fit.loglik,
        converged=fit.converged,
    )


def report_from_coefficients(
    beta, beta_se=None, sigma_u: float = 0.0, sigma_v: float = 0.0
) -> ComparisonReport:
    """Link-arithmetic report for externally supplied coefficients."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (4,):
        raise ValueError("expected 4 coefficients (intercept, version, pretest, interaction)")
    se = np.ones(4) if beta_se is None else np.asarray(beta_se, dtype=float)
    synthetic = FitResult(
        beta=beta,
        beta_se=se,
        sigma_u=sigma_u,
        sigma_v=sigma_v,
        u_modes=np.zeros(0),
        v_modes=np.zeros(0),
        loglik=float("nan"),
        converged=True,
        iterations=0,
    )
    return report(synthetic)


def default_options(seed: int = 0, max_iter: int = 2000, tol: float = 1e-6) -> FitOptions:
    return FitOptions(seed=seed, max_iter=max_iter, tol=tol)
