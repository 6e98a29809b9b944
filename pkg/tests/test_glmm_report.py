import math

import numpy as np
import pytest

from figchain.glmm import report, report_from_coefficients, wald
from figchain.glmm.estimate import FitResult
from figchain.glmm.summary import normal_two_sided_p


def fit_with(beta, se):
    return FitResult(
        beta=np.asarray(beta, dtype=float),
        beta_se=np.asarray(se, dtype=float),
        sigma_u=1.0,
        sigma_v=0.8,
        u_modes=np.zeros(0),
        v_modes=np.zeros(0),
        loglik=-100.0,
        converged=True,
        iterations=10,
    )


def test_zero_estimate_gives_p_one():
    (z, p) = wald(fit_with([0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 0.5, 3.0]))[0]
    assert z == 0.0 and p == 1.0


def test_textbook_z_value():
    (_z, p) = wald(fit_with([1.96, 0, 0, 0], [1.0, 1, 1, 1]))[0]
    assert p == pytest.approx(0.05, abs=1e-3)


def test_z_275_gives_p_006():
    # a 0.53 estimate with p=.006 implies z=2.75 and hence se near 0.193
    (z, p) = wald(fit_with([0.53, 0, 0, 0], [0.53 / 2.75, 1, 1, 1]))[0]
    assert z == pytest.approx(2.75, abs=1e-12)
    assert p == pytest.approx(0.006, abs=2.5e-4)
    assert 0.53 / 2.75 == pytest.approx(0.193, abs=1e-3)


def test_p_value_precision_against_reference():
    # spot values of 2*Phi(-|z|) to 1e-10
    references = {
        0.5: 0.6170750774519740,
        1.0: 0.3173105078629141,
        2.0: 0.0455002638963584,
        3.0: 0.0026997960632602,
        5.0: 5.733031437583892e-07,
    }
    for z, expected in references.items():
        assert normal_two_sided_p(z) == pytest.approx(expected, abs=1e-10)


def test_link_arithmetic_of_reported_model():
    summary = report_from_coefficients([2.153, 0.53, 0.236, 0.0])
    assert summary.baseline_probability == pytest.approx(0.896, abs=1e-3)
    assert summary.coefficients[1].odds_ratio == pytest.approx(1.70, abs=5e-3)
    assert summary.version_probability == pytest.approx(0.936, abs=1e-3)
    assert summary.coefficients[2].pct_odds_change == pytest.approx(26.6, abs=0.5)


def test_exact_link_identities():
    rng = np.random.default_rng(0)
    for _ in range(25):
        beta = rng.normal(0, 1.5, 4)
        se = rng.uniform(0.05, 1.0, 4)
        summary = report(fit_with(beta, se))
        for coef, b in zip(summary.coefficients, beta):
            assert coef.odds_ratio == math.exp(b)
        assert 0.0 < summary.baseline_probability < 1.0
        assert 0.0 < summary.version_probability < 1.0
        expected_baseline = 1.0 / (1.0 + math.exp(-beta[0]))
        assert summary.baseline_probability == pytest.approx(expected_baseline, rel=1e-12)
        expected_version = 1.0 / (1.0 + math.exp(-(beta[0] + beta[1])))
        assert summary.version_probability == pytest.approx(expected_version, rel=1e-12)


def test_interaction_consistency_flag():
    insignificant = report(fit_with([2.0, 0.5, 0.2, 0.05], [0.2, 0.2, 0.1, 0.08]))
    assert insignificant.version_effect_consistent is True
    significant = report(fit_with([2.0, 0.5, 0.2, 0.5], [0.2, 0.2, 0.1, 0.08]))
    assert significant.version_effect_consistent is False


def test_report_json_shape():
    payload = report_from_coefficients([2.153, 0.53, 0.236, 0.0]).to_json()
    assert {c["name"] for c in payload["coefficients"]} == {
        "intercept", "version", "pretest", "interaction",
    }
    for key in (
        "baseline_probability", "version_probability",
        "version_effect_consistent", "sigma_u", "sigma_v", "loglik", "converged",
    ):
        assert key in payload
