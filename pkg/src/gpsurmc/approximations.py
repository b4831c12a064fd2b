"""Fast surrogate log posteriors for the hyperparameters.

Three families, all built around a fixed subset of m data points chosen once
per run (seeded, without replacement):

* subset of data ('sod'): the exact posterior of the m-point restricted
  dataset; O(p m^2 + m^3) per evaluation.
* eigen-exact ('eigen'): the noise-free kernel matrix is replaced by its
  best rank-m approximation from a full eigendecomposition.  A reference
  method for studying low-rank error in isolation; it costs O(m n^2) per
  evaluation and can be slower than the exact posterior.
* nystrom ('nystrom'): the kernel matrix is replaced by
  K^(n,m) [K^(m,m)]^-1 K^(m,n) built from m anchor columns, factored as
  B B' with B = K^(n,m) R^-1, and evaluated through the low-rank path;
  O(p m n + n m^2 + m^3) per evaluation.

The kernel matrix depends on theta, so every evaluator recomputes its
low-rank pieces at each call; nothing is cached across calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from . import lowrank
from .exact import LogDensity, build_exact_posterior, cholesky_spd
from .model import (Dataset, Hyperparams, PriorSpec, infer_mode,
                    kernel_matrix, sq_dists)


@dataclass(frozen=True)
class SurrogateSpec:
    """Which approximation to build, its size m, and the subset seed."""

    method: str
    m: int
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("sod", "eigen", "nystrom"):
            raise ValueError("method must be 'sod', 'eigen' or 'nystrom'")
        if self.m < 1:
            raise ValueError("m must be at least 1")


def choose_subset(n: int, m: int, seed: int) -> np.ndarray:
    """m distinct indices in [0, n), drawn uniformly at random, sorted."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=m, replace=False))


def build_sod(data: Dataset, prior: PriorSpec, spec: SurrogateSpec,
              c: float = 10.0, mode: str = "iso") -> LogDensity:
    """Subset-of-data surrogate: exact posterior of an m-point restriction."""
    idx = choose_subset(data.n, spec.m, spec.seed)
    sub = data.subset(idx)
    inner = build_exact_posterior(sub, prior, c=c, mode=mode)
    m, p = spec.m, data.p

    def fn(vec, counters):
        return inner._fn(vec, counters)

    dens = LogDensity(fn, kind="surrogate", dim=inner.dim,
                      cost_class="O(p m^2 + m^3)",
                      cost_units=float(p * m * m + m ** 3),
                      meta={"method": "sod", "m": m, "subset": idx,
                            "c": float(c), "mode": mode})
    return dens


def build_eigen_exact(data: Dataset, prior: PriorSpec, spec: SurrogateSpec,
                      c: float = 10.0, mode: str = "iso") -> LogDensity:
    """Rank-m eigen-truncation of the noise-free kernel matrix.

    Top-m eigenpairs of K give an orthonormal B and diagonal S, so the
    low-rank diagonal fast path applies.  Reference method only: building K
    and its leading eigenpairs costs O(m n^2), which is not cheaper than
    exact for moderate m.
    """
    n, p = data.n, data.p
    if spec.m > n:
        raise ValueError("m cannot exceed n")
    L = 1 if mode == "iso" else p
    dim = 2 + L
    d2 = sq_dists(data.X, per_dim=(L > 1))
    y = data.y.copy()
    m = spec.m

    def fn(vec, counters):
        if vec.shape != (dim,):
            raise ValueError(f"expected parameter vector of length {dim}")
        theta = Hyperparams.from_vector(vec, c=c)
        K = kernel_matrix(theta, d2)
        counters.kernel_entries += n * n
        vals, vecs = sla.eigh(K, subset_by_index=(n - m, n - 1),
                              check_finite=False)
        # ascending from eigh; clip tiny negative leakage from roundoff
        s = np.clip(vals[::-1], 0.0, None)
        B = vecs[:, ::-1]
        lr = lowrank.LowRankPlusDiag(B=B, S=s, d=math.exp(2.0 * vec[1]),
                                     orthonormal=True)
        return lowrank.log_density(lr, y) + prior.log_density(vec)

    return LogDensity(fn, kind="surrogate", dim=dim,
                      cost_class="O(m n^2)",
                      cost_units=float(p * n * n + m * n * n),
                      meta={"method": "eigen", "m": m, "c": float(c), "mode": mode})


def build_nystrom(data: Dataset, prior: PriorSpec, spec: SurrogateSpec,
                  c: float = 10.0, mode: str = "iso") -> LogDensity:
    """Nystrom surrogate from m anchor columns of the kernel matrix.

    With R'R = K^(m,m) (jittered if needed) and B = K^(n,m) R^-1, the
    approximated kernel matrix is B B', handled by the low-rank path with
    S = I and D = sigma^2 I.
    """
    n, p = data.n, data.p
    if spec.m > n:
        raise ValueError("m cannot exceed n")
    idx = choose_subset(n, spec.m, spec.seed)
    L = 1 if mode == "iso" else p
    dim = 2 + L
    d2_nm = sq_dists(data.X, data.X[idx], per_dim=(L > 1))
    y = data.y.copy()
    m = spec.m
    ones = np.ones(m)

    def fn(vec, counters):
        if vec.shape != (dim,):
            raise ValueError(f"expected parameter vector of length {dim}")
        theta = Hyperparams.from_vector(vec, c=c)
        Knm = kernel_matrix(theta, d2_nm)
        counters.kernel_entries += n * m
        Kmm = Knm[idx, :]
        fac = cholesky_spd(Kmm)
        B = sla.solve_triangular(fac.upper, Knm.T, trans=1, lower=False,
                                 check_finite=False).T
        lr = lowrank.LowRankPlusDiag(B=B, S=ones, d=math.exp(2.0 * vec[1]))
        return lowrank.log_density(lr, y) + prior.log_density(vec)

    return LogDensity(fn, kind="surrogate", dim=dim,
                      cost_class="O(p m n + n m^2 + m^3)",
                      cost_units=float(p * m * n + n * m * m + m ** 3),
                      meta={"method": "nystrom", "m": m, "subset": idx,
                            "c": float(c), "mode": mode})


def build_surrogate(data: Dataset, prior: PriorSpec, spec: SurrogateSpec,
                    c: float = 10.0, mode: str = "iso") -> LogDensity:
    """Dispatch on spec.method."""
    builder = {"sod": build_sod, "eigen": build_eigen_exact,
               "nystrom": build_nystrom}[spec.method]
    return builder(data, prior, spec, c=c, mode=mode)


def nystrom_spectral(data: Dataset, theta: Hyperparams, subset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Approximate eigenpairs of the full kernel matrix from m anchors.

    From the eigendecomposition K^(m,m) e_i = lam_i e_i, the full-matrix
    approximations are

        lam_hat_i = (n/m) lam_i,
        e_hat_i   = sqrt(m/n) / lam_i * K^(n,m) e_i.

    Returns (lam_hat, E_hat, valid) sorted by descending lam_hat.  Anchor
    eigenvalues at or below zero leave the eigenvector approximation
    undefined: those columns are NaN and flagged invalid.
    """
    subset = np.asarray(subset, dtype=int)
    m = subset.size
    n = data.n
    if m < 1 or m > n or np.unique(subset).size != m:
        raise ValueError("subset must hold distinct indices")
    mode = infer_mode(theta, data.p)
    per_dim = theta.log_ls.size > 1
    Knm = kernel_matrix(theta, sq_dists(data.X, data.X[subset], per_dim=per_dim))
    Kmm = Knm[subset, :]
    vals, vecs = sla.eigh(Kmm, check_finite=False)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    lam_hat = (n / m) * vals
    valid = vals > 0
    E_hat = np.full((n, m), np.nan)
    if np.any(valid):
        scale = math.sqrt(m / n) / vals[valid]
        E_hat[:, valid] = (Knm @ vecs[:, valid]) * scale
    return lam_hat, E_hat, valid
