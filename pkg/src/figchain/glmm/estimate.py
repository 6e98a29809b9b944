"""Laplace-approximated marginal likelihood and its optimization.

Inner problem: for fixed (beta, sigma_u, sigma_v), maximize the joint
penalized log-likelihood

    sum_rows [ y*eta - log(1 + e^eta) ] - sum_i u_i^2/(2 su^2) - sum_j v_j^2/(2 sv^2)

over the random effects by Newton iterations. The penalized Hessian has
diagonal-plus-bipartite structure [[Du, B], [B^T, Dv]] with diagonal Du
and Dv, so each Newton step is a Schur-complement solve of size
n_items x n_items. The marginal log-likelihood is then

    pen(mode) - n_u*log(su) - n_v*log(sv) - 0.5*logdet(H)

which reduces exactly to the plain logistic log-likelihood when both
variances are zero. The outer optimization over (beta, log su, log sv)
is a derivative-free simplex search with seeded restarts; standard
errors come from a finite-difference Hessian at the optimum.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import minimize
from scipy.special import expit

from ..errors import NonConvergence, SeparationWarning
from .data import GlmmDataset

SIGMA_FLOOR = 1e-6
LOG_SIGMA_MIN = math.log(SIGMA_FLOOR)
LOG_SIGMA_MAX = 12.0
SEPARATION_BOUND = 15.0

INNER_TOL = 1e-8
INNER_MAX_ITER = 200


@dataclass
class InnerSolution:
    u: np.ndarray
    v: np.ndarray
    penalized_loglik: float
    logdet_hessian: float
    grad_max: float
    iterations: int
    converged: bool
    du: np.ndarray | None = None
    dv: np.ndarray | None = None
    b: np.ndarray | None = None

    def dense_hessian(self) -> np.ndarray:
        """Negated Hessian of the penalized log-likelihood (positive definite)."""
        n_u = 0 if self.du is None else len(self.du)
        n_v = 0 if self.dv is None else len(self.dv)
        h = np.zeros((n_u + n_v, n_u + n_v))
        if n_u:
            h[:n_u, :n_u] = np.diag(self.du)
        if n_v:
            h[n_u:, n_u:] = np.diag(self.dv)
        if n_u and n_v and self.b is not None:
            h[:n_u, n_u:] = self.b
            h[n_u:, :n_u] = self.b.T
        return h


class _PairAggregator:
    """Precomputed layout for summing row weights into the (i, j) block."""

    def __init__(self, i: np.ndarray, j: np.ndarray, n_u: int, n_v: int):
        order = np.lexsort((j, i))
        si, sj = i[order], j[order]
        boundary = np.ones(len(si), dtype=bool)
        boundary[1:] = (np.diff(si) != 0) | (np.diff(sj) != 0)
        self.order = order
        self.starts = np.nonzero(boundary)[0]
        self.rows = si[self.starts]
        self.cols = sj[self.starts]
        self.shape = (n_u, n_v)

    def dense(self, w: np.ndarray) -> np.ndarray:
        sums = np.add.reduceat(w[self.order], self.starts)
        b = np.zeros(self.shape)
        b[self.rows, self.cols] = sums
        return b


class _InnerSolver:
    def __init__(self, dataset: GlmmDataset):
        self.data = dataset
        self.x = dataset.design_matrix()
        self.y = dataset.outcome
        self.i = dataset.participant
        self.j = dataset.item
        self.n_u = dataset.n_participants
        self.n_v = dataset.n_items
        self.pairs = _PairAggregator(self.i, self.j, self.n_u, self.n_v)

    def _loglik(self, eta: np.ndarray) -> float:
        return float(self.y @ eta - np.logaddexp(0.0, eta).sum())

    def solve(
        self,
        sigma_u: float,
        sigma_v: float,
        beta: np.ndarray,
        start: tuple[np.ndarray, np.ndarray] | None = None,
        tol: float = INNER_TOL,
        max_iter: int = INNER_MAX_ITER,
    ) -> InnerSolution:
        if sigma_u < 0 or sigma_v < 0:
            raise ValueError("standard deviations must be nonnegative")
        active_u = sigma_u > 0.0
        active_v = sigma_v > 0.0
        xb = self.x @ np.asarray(beta, dtype=float)
        u = np.zeros(self.n_u)
        v = np.zeros(self.n_v)
        if start is not None:
            if active_u and start[0] is not None and len(start[0]) == self.n_u:
                u = start[0].copy()
            if active_v and start[1] is not None and len(start[1]) == self.n_v:
                v = start[1].copy()
        inv_su2 = 1.0 / sigma_u**2 if active_u else 0.0
        inv_sv2 = 1.0 / sigma_v**2 if active_v else 0.0

        def eta_of(uu, vv):
            e = xb.copy()
            if active_u:
                e += uu[self.i]
            if active_v:
                e += vv[self.j]
            return e

        def pen(uu, vv):
            val = self._loglik(eta_of(uu, vv))
            if active_u:
                val -= 0.5 * inv_su2 * float(uu @ uu)
            if active_v:
                val -= 0.5 * inv_sv2 * float(vv @ vv)
            return val

        if not active_u and not active_v:
            value = pen(u, v)
            return InnerSolution(
                u=u, v=v, penalized_loglik=value, logdet_hessian=0.0,
                grad_max=0.0, iterations=0, converged=True,
            )

        current = pen(u, v)
        converged = False
        iterations = 0
        for iterations in range(1, max_iter + 1):
            eta = eta_of(u, v)
            mu = expit(eta)
            resid = self.y - mu
            gu = (
                np.bincount(self.i, weights=resid, minlength=self.n_u) - u * inv_su2
                if active_u
                else np.zeros(0)
            )
            gv = (
                np.bincount(self.j, weights=resid, minlength=self.n_v) - v * inv_sv2
                if active_v
                else np.zeros(0)
            )
            grad_max = max(
                float(np.max(np.abs(gu))) if active_u else 0.0,
                float(np.max(np.abs(gv))) if active_v else 0.0,
            )
            if grad_max < tol:
                converged = True
                break

            w = mu * (1.0 - mu)
            du = (
                np.bincount(self.i, weights=w, minlength=self.n_u) + inv_su2
                if active_u
                else None
            )
            dv = (
                np.bincount(self.j, weights=w, minlength=self.n_v) + inv_sv2
                if active_v
                else None
            )
            if active_u and active_v:
                b = self.pairs.dense(w)
                bt_du_inv = b.T / du
                schur = np.diag(dv) - bt_du_inv @ b
                rhs_v = gv - bt_du_inv @ gu
                step_v = _chol_solve(schur, rhs_v)
                step_u = (gu - b @ step_v) / du
            elif active_u:
                step_u, step_v = gu / du, np.zeros(0)
            else:
                step_u, step_v = np.zeros(0), gv / dv

            scale = 1.0
            while scale >= 2.0**-30:
                trial_u = u + scale * step_u if active_u else u
                trial_v = v + scale * step_v if active_v else v
                trial = pen(trial_u, trial_v)
                if trial >= current - 1e-12 * (1.0 + abs(current)):
                    u, v, current = trial_u, trial_v, trial
                    break
                scale /= 2.0
            else:
                break  # no ascent possible at float precision

        if not converged:
            raise NonConvergence(
                f"inner Newton did not reach gradient {tol:g} in {max_iter} iterations "
                f"(grad_max={grad_max:g})"
            )

        # Curvature blocks at the mode for the Laplace determinant.
        eta = eta_of(u, v)
        mu = expit(eta)
        w = mu * (1.0 - mu)
        du = dv = b = None
        if active_u and active_v:
            du = np.bincount(self.i, weights=w, minlength=self.n_u) + inv_su2
            dv = np.bincount(self.j, weights=w, minlength=self.n_v) + inv_sv2
            b = self.pairs.dense(w)
            schur = np.diag(dv) - (b.T / du) @ b
            logdet = float(np.sum(np.log(du))) + _chol_logdet(schur)
        elif active_u:
            du = np.bincount(self.i, weights=w, minlength=self.n_u) + inv_su2
            logdet = float(np.sum(np.log(du)))
        else:
            dv = np.bincount(self.j, weights=w, minlength=self.n_v) + inv_sv2
            logdet = float(np.sum(np.log(dv)))

        return InnerSolution(
            u=u if active_u else np.zeros(self.n_u),
            v=v if active_v else np.zeros(self.n_v),
            penalized_loglik=current,
            logdet_hessian=logdet,
            grad_max=grad_max,
            iterations=iterations,
            converged=True,
            du=du,
            dv=dv,
            b=b,
        )

    def laplace(
        self,
        sigma_u: float,
        sigma_v: float,
        beta: np.ndarray,
        start=None,
    ) -> tuple[float, InnerSolution]:
        sol = self.solve(sigma_u, sigma_v, beta, start=start)
        value = sol.penalized_loglik - 0.5 * sol.logdet_hessian
        if sigma_u > 0.0:
            value -= self.n_u * math.log(sigma_u)
        if sigma_v > 0.0:
            value -= self.n_v * math.log(sigma_v)
        return value, sol


def _chol_solve(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return cho_solve(cho_factor(a, lower=True), rhs)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * float(np.mean(np.diag(a))) + 1e-300
        return cho_solve(cho_factor(a + jitter * np.eye(len(a)), lower=True), rhs)


def _chol_logdet(a: np.ndarray) -> float:
    try:
        factor, _ = cho_factor(a, lower=True)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * float(np.mean(np.diag(a))) + 1e-300
        factor, _ = cho_factor(a + jitter * np.eye(len(a)), lower=True)
    return 2.0 * float(np.sum(np.log(np.diag(factor))))


def joint_mode(
    theta: tuple[float, float],
    beta,
    dataset: GlmmDataset,
    start=None,
    tol: float = INNER_TOL,
    max_iter: int = INNER_MAX_ITER,
) -> InnerSolution:
    """Random-effect modes and penalized Hessian at fixed (sigmas, beta)."""
    return _InnerSolver(dataset).solve(
        theta[0], theta[1], np.asarray(beta, dtype=float), start=start,
        tol=tol, max_iter=max_iter,
    )


def laplace_loglik(theta: tuple[float, float], beta, dataset: GlmmDataset) -> float:
    """Laplace approximation of the marginal log-likelihood."""
    value, _ = _InnerSolver(dataset).laplace(
        theta[0], theta[1], np.asarray(beta, dtype=float)
    )
    return value


@dataclass
class FitOptions:
    """Outer-optimization knobs.

    tol is the relative log-likelihood change below which a restart is
    considered converged; the simplex itself always runs tighter than
    that. max_iter caps simplex iterations per run.
    """

    seed: int = 0
    max_iter: int = 2000
    tol: float = 1e-6
    restarts: int = 3
    fix_sigma_u: float | None = None
    fix_sigma_v: float | None = None


@dataclass
class FitResult:
    beta: np.ndarray
    beta_se: np.ndarray
    sigma_u: float
    sigma_v: float
    u_modes: np.ndarray
    v_modes: np.ndarray
    loglik: float
    converged: bool
    iterations: int
    n_evaluations: int = 0

    @property
    def sigma_at_floor(self) -> tuple[bool, bool]:
        # Variances optimized onto the floor are effectively zero.
        edge = SIGMA_FLOOR * (1.0 + 1e-9)
        return (0.0 < self.sigma_u <= edge, 0.0 < self.sigma_v <= edge)


def fit(dataset: GlmmDataset, options: FitOptions | None = None) -> FitResult:
    """Maximize the Laplace marginal likelihood over (beta, log sigmas)."""
    options = options or FitOptions()
    solver = _InnerSolver(dataset)
    free_u = options.fix_sigma_u is None
    free_v = options.fix_sigma_v is None
    n_free = 4 + int(free_u) + int(free_v)

    state = {"start": None, "evals": 0}

    def unpack(x: np.ndarray) -> tuple[np.ndarray, float, float]:
        beta = x[:4]
        pos = 4
        if free_u:
            su = math.exp(min(max(x[pos], LOG_SIGMA_MIN), LOG_SIGMA_MAX))
            pos += 1
        else:
            su = float(options.fix_sigma_u)
        if free_v:
            sv = math.exp(min(max(x[pos], LOG_SIGMA_MIN), LOG_SIGMA_MAX))
        else:
            sv = float(options.fix_sigma_v)
        return beta, su, sv

    def objective(x: np.ndarray) -> float:
        state["evals"] += 1
        beta, su, sv = unpack(x)
        try:
            value, sol = solver.laplace(su, sv, beta, start=state["start"])
        except NonConvergence:
            return 1e10
        state["start"] = (sol.u, sol.v)
        return -value

    x0 = np.zeros(n_free)  # beta = 0, sigmas = 1 on the log scale
    rng = np.random.default_rng(options.seed)
    best = None
    total_iterations = 0
    last_rel_change = math.inf
    starts = [x0]
    for x_start in starts:
        previous_fun = None if best is None else best.fun
        result = minimize(
            objective,
            x_start,
            method="Nelder-Mead",
            options={
                "maxiter": options.max_iter,
                "xatol": 1e-8,
                "fatol": 1e-10,
                "adaptive": True,
            },
        )
        total_iterations += result.nit
        if best is None or result.fun < best.fun:
            best = result
        if previous_fun is not None:
            last_rel_change = abs(previous_fun - best.fun) / max(1.0, abs(best.fun))
        if len(starts) <= options.restarts:
            perturbation = rng.normal(scale=0.05, size=n_free) * (1.0 + np.abs(best.x))
            starts.append(best.x + perturbation)

    beta_hat, su_hat, sv_hat = unpack(best.x)
    value, final_sol = solver.laplace(su_hat, sv_hat, beta_hat, start=state["start"])

    if np.any(np.abs(beta_hat) > SEPARATION_BOUND):
        warnings.warn(
            f"|beta| exceeds {SEPARATION_BOUND}: possible quasi-separation",
            SeparationWarning,
            stacklevel=2,
        )

    hess = _fd_hessian(objective, best.x)
    beta_se, se_ok = _standard_errors(hess)
    converged = (bool(best.success) or last_rel_change <= options.tol) and se_ok

    return FitResult(
        beta=np.asarray(beta_hat, dtype=float).copy(),
        beta_se=beta_se,
        sigma_u=su_hat,
        sigma_v=sv_hat,
        u_modes=final_sol.u,
        v_modes=final_sol.v,
        loglik=value,
        converged=converged,
        iterations=total_iterations,
        n_evaluations=state["evals"],
    )


def _fd_hessian(func, x: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    n = len(x)
    h = rel_step * (1.0 + np.abs(x))
    f0 = func(x)
    hess = np.zeros((n, n))
    for k in range(n):
        ek = np.zeros(n)
        ek[k] = h[k]
        hess[k, k] = (func(x + ek) - 2.0 * f0 + func(x - ek)) / h[k] ** 2
    for k in range(n):
        for l in range(k + 1, n):
            ek = np.zeros(n)
            el = np.zeros(n)
            ek[k] = h[k]
            el[l] = h[l]
            mixed = (
                func(x + ek + el)
                - func(x + ek - el)
                - func(x - ek + el)
                + func(x - ek - el)
            ) / (4.0 * h[k] * h[l])
            hess[k, l] = hess[l, k] = mixed
    return hess


def _standard_errors(hess: np.ndarray) -> tuple[np.ndarray, bool]:
    try:
        cov = np.linalg.inv(hess)
        diag = np.diag(cov)[:4]
        if np.all(diag > 0):
            return np.sqrt(diag), True
    except np.linalg.LinAlgError:
        pass
    try:
        cov_b = np.linalg.inv(hess[:4, :4])
        diag = np.diag(cov_b)
        if np.all(diag > 0):
            return np.sqrt(diag), True
    except np.linalg.LinAlgError:
        pass
    return np.full(4, np.nan), False
