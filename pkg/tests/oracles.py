"""Independent reference implementations used only to check results.

Nothing here shares code with the package's computation paths: the
logistic fit is plain IRLS, marginal likelihoods are Monte Carlo
integrals, path boxes come from dense sampling, and the joint-mode
check is an iteratively refined grid search.
"""
from __future__ import annotations

import numpy as np


def irls_logistic(x: np.ndarray, y: np.ndarray, tol: float = 1e-12, max_iter: int = 100):
    """Newton/IRLS maximum-likelihood logistic regression."""
    beta = np.zeros(x.shape[1])
    for _ in range(max_iter):
        eta = x @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        grad = x.T @ (y - mu)
        w = mu * (1.0 - mu)
        hess = x.T @ (x * w[:, None])
        step = np.linalg.solve(hess, grad)
        beta = beta + step
        if np.max(np.abs(grad)) < tol:
            break
    return beta


def logistic_loglik(x: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = x @ beta
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def mc_marginal_loglik(
    x: np.ndarray,
    y: np.ndarray,
    i_idx: np.ndarray,
    j_idx: np.ndarray,
    beta: np.ndarray,
    sigma_u: float,
    sigma_v: float,
    n_draws: int = 1_000_000,
    seed: int = 0,
    chunk: int = 50_000,
):
    """Monte Carlo estimate of log integral over the random effects.

    Returns (log_lik_hat, standard_error_of_log). Draws come straight
    from the random-effect priors; the SE of the log follows from the
    delta method on the mean of the per-draw likelihoods.
    """
    rng = np.random.default_rng(seed)
    n_u = int(i_idx.max()) + 1
    n_v = int(j_idx.max()) + 1
    xb = x @ beta

    log_weights = np.empty(n_draws)
    done = 0
    while done < n_draws:
        m = min(chunk, n_draws - done)
        u = rng.normal(0.0, sigma_u, size=(m, n_u)) if sigma_u > 0 else np.zeros((m, n_u))
        v = rng.normal(0.0, sigma_v, size=(m, n_v)) if sigma_v > 0 else np.zeros((m, n_v))
        eta = xb[None, :] + u[:, i_idx] + v[:, j_idx]
        log_weights[done : done + m] = eta @ y - np.logaddexp(0.0, eta).sum(axis=1)
        done += m

    shift = log_weights.max()
    w = np.exp(log_weights - shift)
    mean_w = w.mean()
    se_w = w.std(ddof=1) / np.sqrt(n_draws)
    log_lik = shift + np.log(mean_w)
    se_log = se_w / mean_w
    return float(log_lik), float(se_log)


def grid_search_joint_mode(
    x: np.ndarray,
    y: np.ndarray,
    i_idx: np.ndarray,
    j_idx: np.ndarray,
    beta: np.ndarray,
    sigma_u: float,
    sigma_v: float,
    span: float = 5.0,
    rounds: int = 8,
    points: int = 41,
):
    """Refined 2-D grid maximization of the penalized log-likelihood.

    Only supports one participant and one item (the shape the check
    needs); each round zooms into the best cell of the previous one.
    """
    assert int(i_idx.max()) == 0 and int(j_idx.max()) == 0
    xb = x @ beta

    def pen(u, v):
        eta = xb + u + v
        ll = y @ eta - np.logaddexp(0.0, eta).sum()
        return ll - u**2 / (2 * sigma_u**2) - v**2 / (2 * sigma_v**2)

    u_lo, u_hi = -span, span
    v_lo, v_hi = -span, span
    best = (0.0, 0.0)
    for _ in range(rounds):
        us = np.linspace(u_lo, u_hi, points)
        vs = np.linspace(v_lo, v_hi, points)
        values = np.array([[pen(u, v) for v in vs] for u in us])
        iu, iv = np.unravel_index(np.argmax(values), values.shape)
        best = (us[iu], vs[iv])
        du = (u_hi - u_lo) / (points - 1)
        dv = (v_hi - v_lo) / (points - 1)
        u_lo, u_hi = best[0] - du, best[0] + du
        v_lo, v_hi = best[1] - dv, best[1] + dv
    return best


def sampled_path_bbox(segments, samples_per_segment: int = 1000):
    """Bounding box from dense sampling of each segment's point function."""
    ts = np.linspace(0.0, 1.0, samples_per_segment)
    xs, ys = [], []
    for seg in segments:
        for t in ts:
            px, py = seg.point(float(t))
            xs.append(px)
            ys.append(py)
    return min(xs), min(ys), max(xs), max(ys)


def lstsq_axis_fit(old: np.ndarray, new: np.ndarray):
    """Least-squares scale/offset per axis via the normal equations of
    an explicit design matrix (independent of the package's closed form)."""
    design = np.column_stack([old, np.ones(len(old))])
    coef, *_ = np.linalg.lstsq(design, new, rcond=None)
    return float(coef[0]), float(coef[1])
