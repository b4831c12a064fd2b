"""Exact posterior evaluation via Cholesky factorization.

The log posterior of the hyperparameters is

    log p(theta | y) = -y' C^-1 y / 2 - log det(C) / 2 - (n/2) log 2pi
                       + log prior(theta) + const

evaluated through an upper Cholesky factor R'R = C: one triangular solve
gives the quadratic form, the factor diagonal gives the determinant.  Cost
is O(n^3) per evaluation, which is what the surrogate evaluators are built
to avoid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .model import (LOG_2PI, Dataset, Hyperparams, PriorSpec, infer_mode,
                    kernel_eval, sq_dists)


@dataclass
class CholFactor:
    """Upper Cholesky factor of an SPD matrix, with the jitter actually used.

    upper satisfies upper' upper = C + jitter * I;  jitter is 0.0 when the
    first, unmodified attempt succeeded.
    """

    upper: np.ndarray
    log_det: float
    jitter: float


def cholesky_spd(C: np.ndarray, jitter_scale: float = 1e-8,
                 max_tries: int = 4) -> CholFactor:
    """Factor an SPD matrix, escalating diagonal jitter on failure.

    The first attempt adds nothing.  On failure, eps = jitter_scale *
    mean(diag(C)) is added and multiplied by 10 for each further attempt,
    max_tries jittered attempts in total.  Raises LinAlgError with the final
    eps if every attempt fails.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("matrix must be square")
    base = jitter_scale * float(np.mean(np.diag(C)))
    eps_schedule = [0.0] + [base * 10.0 ** j for j in range(max_tries)]
    for eps in eps_schedule:
        try:
            if eps == 0.0:
                R = sla.cholesky(C, lower=False, check_finite=False)
            else:
                Cj = C.copy()
                Cj[np.diag_indices_from(Cj)] += eps
                R = sla.cholesky(Cj, lower=False, check_finite=False)
        except sla.LinAlgError:
            continue
        log_det = 2.0 * float(np.log(R.diagonal()).sum())
        return CholFactor(upper=R, log_det=log_det, jitter=eps)
    raise sla.LinAlgError(
        f"cholesky failed after {max_tries} jittered attempts "
        f"(final eps={eps_schedule[-1]:.3e})")


@dataclass
class EvalCounters:
    evals: int = 0
    kernel_entries: int = 0


class LogDensity:
    """Callable handle on an unnormalized log density over parameter vectors.

    Wraps a deterministic function of the parameter vector and keeps
    evaluation counters so that callers can audit how much exact and
    surrogate work a sampling scheme performed.  kind is 'exact' or
    'surrogate'; cost_units is a rough per-evaluation operation count used
    for ladder sanity checks (None when unknown).
    """

    def __init__(self, fn, kind: str, dim: int, cost_class: str = "",
                 cost_units: float | None = None, meta: dict | None = None):
        if kind not in ("exact", "surrogate"):
            raise ValueError("kind must be 'exact' or 'surrogate'")
        self._fn = fn
        self.kind = kind
        self.dim = dim
        self.cost_class = cost_class
        self.cost_units = cost_units
        self.meta = meta or {}
        self.counters = EvalCounters()

    @property
    def eval_count(self) -> int:
        return self.counters.evals

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        self.counters.evals += 1
        return self._fn(theta, self.counters)


def gaussian_loglik(fac: CholFactor, y: np.ndarray) -> float:
    """Log N(y | 0, C) from a Cholesky factor of C."""
    u = sla.solve_triangular(fac.upper, y, trans=1, lower=False,
                             check_finite=False)
    n = y.size
    return float(-0.5 * (u @ u) - 0.5 * fac.log_det - 0.5 * n * LOG_2PI)


def build_exact_posterior(data: Dataset, prior: PriorSpec, c: float = 10.0,
                          mode: str = "iso") -> LogDensity:
    """Evaluator handle for the exact log posterior on a dataset.

    Squared distances are precomputed once; each call rebuilds the kernel
    matrix for the given theta and refactors it.  Deterministic: identical
    theta yields a bit-identical value.
    """
    if mode not in ("iso", "ard"):
        raise ValueError("mode must be 'iso' or 'ard'")
    n, p = data.n, data.p
    L = 1 if mode == "iso" else p
    dim = 2 + L
    d2 = sq_dists(data.X, per_dim=(L > 1))
    y = data.y.copy()
    c2 = float(c) ** 2
    half_n_log2pi = 0.5 * n * LOG_2PI

    def fn(vec, counters):
        if vec.shape != (dim,):
            raise ValueError(f"expected parameter vector of length {dim}")
        eta2 = math.exp(2.0 * vec[0])
        sig2 = math.exp(2.0 * vec[1])
        if L == 1:
            E = d2 * (-math.exp(-2.0 * vec[2]))
        else:
            E = np.tensordot(-np.exp(-2.0 * vec[2:]), d2, axes=1)
        np.exp(E, out=E)
        E *= eta2
        E += c2
        E.flat[:: n + 1] += sig2
        counters.kernel_entries += n * n
        fac = cholesky_spd(E)
        u = sla.solve_triangular(fac.upper, y, trans=1, lower=False,
                                 check_finite=False)
        return float(-0.5 * (u @ u) - 0.5 * fac.log_det - half_n_log2pi
                     + prior.log_density(vec))

    return LogDensity(fn, kind="exact", dim=dim, cost_class="O(p n^2 + n^3)",
                      cost_units=float(p * n * n + n ** 3),
                      meta={"method": "exact", "n": n, "c": float(c), "mode": mode})


def exact_log_posterior(theta: Hyperparams, data: Dataset, prior: PriorSpec) -> float:
    """One-shot exact log posterior (kernel mode inferred from theta)."""
    mode = infer_mode(theta, data.p)
    dens = build_exact_posterior(data, prior, c=theta.c, mode=mode)
    return dens(theta.to_vector())


def predictive_fixed_theta(theta: Hyperparams, data: Dataset, xstar) -> tuple[float, float]:
    """Predictive mean and variance of the target at xstar for fixed theta.

    Two triangular solves against the training factor; the predictive
    variance includes the noise term.
    """
    xstar = np.atleast_1d(np.asarray(xstar, dtype=float))
    if xstar.shape != (data.p,):
        raise ValueError("xstar must have one entry per input dimension")
    mode = infer_mode(theta, data.p)
    from .model import build_cov_matrix  # local import to keep module load light
    C = build_cov_matrix(data, theta, include_noise=True, mode=mode)
    fac = cholesky_spd(C)
    k = np.array([kernel_eval(row, xstar, theta) for row in data.X])
    v = theta.c ** 2 + theta.eta ** 2 + theta.sigma ** 2
    u = sla.solve_triangular(fac.upper, data.y, trans=1, lower=False, check_finite=False)
    w = sla.solve_triangular(fac.upper, k, trans=1, lower=False, check_finite=False)
    mean = float(w @ u)
    var = float(v - w @ w)
    return mean, var


def mc_predictive(thetas, data: Dataset, xstar) -> tuple[float, float]:
    """Predictive mean/variance averaged over posterior draws of theta.

    Combines per-draw moments by the law of total variance: the returned
    variance is mean(vars) + var(means) with the population convention.
    """
    thetas = list(thetas)
    if not thetas:
        raise ValueError("need at least one theta draw")
    means = np.empty(len(thetas))
    vars_ = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        means[i], vars_[i] = predictive_fixed_theta(th, data, xstar)
    return float(means.mean()), float(vars_.mean() + means.var())
