import numpy as np
import pytest

from figchain.errors import NonConvergence
from figchain.glmm import GlmmDataset, joint_mode, laplace_loglik

from oracles import grid_search_joint_mode, logistic_loglik, mc_marginal_loglik


def crossed_dataset(seed=7, n_u=5, n_v=4, beta=(0.3, 0.4, 0.15, 0.05), su=0.5, sv=0.4):
    rng = np.random.default_rng(seed)
    part = np.repeat(np.arange(n_u), n_v)
    item = np.tile(np.arange(n_v), n_u)
    version = (part % 2).astype(float)
    raw = rng.integers(0, 10, n_u).astype(float)
    centered = raw - raw.mean()
    centered -= centered.mean()
    pre = centered[part]
    x = np.column_stack([np.ones(len(part)), version, pre, version * pre])
    u = rng.normal(0, su, n_u)
    v = rng.normal(0, sv, n_v)
    eta = x @ np.asarray(beta) + u[part] + v[item]
    y = (rng.random(len(part)) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    ds = GlmmDataset(participant=part, item=item, version=version, pretest=pre, outcome=y)
    return ds, x, y


def test_strong_shrinkage_sends_modes_to_zero():
    ds, _x, _y = crossed_dataset()
    sol = joint_mode((1e-4, 1e-4), np.zeros(4), ds)
    assert np.max(np.abs(sol.u)) < 1e-6
    assert np.max(np.abs(sol.v)) < 1e-6


def test_single_cell_mode_matches_grid_search():
    ds = GlmmDataset(
        participant=np.array([0]),
        item=np.array([0]),
        version=np.array([1.0]),
        pretest=np.array([0.0]),
        outcome=np.array([1.0]),
    )
    sol = joint_mode((1.0, 1.0), np.zeros(4), ds)
    x = np.array([[1.0, 1.0, 0.0, 0.0]])
    gu, gv = grid_search_joint_mode(
        x, np.array([1.0]), np.array([0]), np.array([0]), np.zeros(4), 1.0, 1.0
    )
    assert abs(sol.u[0] - gu) < 1e-6
    assert abs(sol.v[0] - gv) < 1e-6
    # stationarity of the 2-equation system at the mode
    eta = x[0] @ np.zeros(4) + sol.u[0] + sol.v[0]
    mu = 1.0 / (1.0 + np.exp(-eta))
    assert abs((1.0 - mu) - sol.u[0]) < 1e-8
    assert abs((1.0 - mu) - sol.v[0]) < 1e-8


def test_balanced_fixture_participant_modes_sum_to_zero():
    # mirrored participant pairs, every item half correct
    n_u, n_v = 6, 4
    part = np.repeat(np.arange(n_u), n_v)
    item = np.tile(np.arange(n_v), n_u)
    base = np.array([1.0, 0.0, 1.0, 0.0])
    y = np.concatenate([base if k % 2 == 0 else 1.0 - base for k in range(n_u)])
    ds = GlmmDataset(
        participant=part,
        item=item,
        version=np.zeros(n_u * n_v),
        pretest=np.zeros(n_u * n_v),
        outcome=y,
    )
    sol = joint_mode((1.0, 0.8), np.zeros(4), ds)
    assert abs(sol.u.sum()) < 1e-8
    assert abs(sol.v.sum()) < 1e-8


def test_gradient_and_curvature_certificates_at_mode():
    ds, _x, _y = crossed_dataset()
    sol = joint_mode((0.5, 0.4), np.array([0.3, 0.4, 0.15, 0.05]), ds)
    assert sol.converged
    assert sol.grad_max < 1e-8
    h = sol.dense_hessian()
    # objective Hessian is -h; all Newton pivots negative <=> h positive definite
    np.linalg.cholesky(h)
    # numerical curvature cross-check on a few coordinates
    def pen(u, v):
        eta = _x @ np.array([0.3, 0.4, 0.15, 0.05]) + u[ds.participant] + v[ds.item]
        ll = _y @ eta - np.logaddexp(0.0, eta).sum()
        return ll - (u @ u) / (2 * 0.5**2) - (v @ v) / (2 * 0.4**2)

    eps = 1e-4
    for k in (0, 3):
        e = np.zeros(len(sol.u))
        e[k] = eps
        second = (pen(sol.u + e, sol.v) - 2 * pen(sol.u, sol.v) + pen(sol.u - e, sol.v)) / eps**2
        assert abs(second + h[k, k]) < 1e-3


def test_zero_variance_reduces_to_plain_logistic():
    ds, x, y = crossed_dataset()
    beta = np.array([0.3, 0.4, 0.15, 0.05])
    assert laplace_loglik((0.0, 0.0), beta, ds) == pytest.approx(
        logistic_loglik(x, y, beta), abs=1e-12
    )


def test_laplace_tracks_monte_carlo_on_small_variances():
    # Small variances keep the approximation error below what a modest
    # Monte Carlo run can resolve, so this checks the formula itself.
    ds, x, y = crossed_dataset(su=0.15, sv=0.12)
    beta = np.array([0.3, 0.4, 0.15, 0.05])
    lap = laplace_loglik((0.15, 0.12), beta, ds)
    mc, se = mc_marginal_loglik(
        x, y, ds.participant, ds.item, beta, 0.15, 0.12, n_draws=200_000, seed=5
    )
    assert abs(lap - mc) <= 3.0 * se


def test_duplicating_rows_does_not_double_the_loglik():
    # random effects are shared across copies, so the marginal likelihood
    # is not the square of the original
    ds, _x, _y = crossed_dataset()
    beta = np.array([0.3, 0.4, 0.15, 0.05])
    single = laplace_loglik((0.5, 0.4), beta, ds)
    doubled = GlmmDataset(
        participant=np.concatenate([ds.participant, ds.participant]),
        item=np.concatenate([ds.item, ds.item]),
        version=np.concatenate([ds.version, ds.version]),
        pretest=np.concatenate([ds.pretest, ds.pretest]),
        outcome=np.concatenate([ds.outcome, ds.outcome]),
    )
    both = laplace_loglik((0.5, 0.4), beta, doubled)
    assert abs(both - 2.0 * single) > 0.05


def test_nonconvergence_is_reported():
    ds, _x, _y = crossed_dataset()
    with pytest.raises(NonConvergence):
        joint_mode((1.0, 1.0), np.zeros(4), ds, max_iter=1)
