"""Model primitives: hyperparameters, datasets, covariance construction, priors.

The observation model is a zero-mean Gaussian process with additive white
noise.  Covariances between latent function values at inputs x and x' are

    K(x, x') = c^2 + eta^2 * exp(-sum_k (x_k - x'_k)^2 / rho_k^2)

with one shared length scale rho (isotropic) or one rho_k per input dimension
(ARD).  The covariance of the observed targets adds sigma^2 on the diagonal.

Sampling is done on the log scale throughout.  Parameter vectors are ordered
[log_eta, log_sigma, log_ls...]; c is a fixed constant, not sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Hyperparams:
    """Kernel hyperparameters on the log scale.

    log_ls has length 1 (isotropic) or length p (ARD, one entry per input
    dimension).  c is the fixed constant part of the kernel; it may be zero.
    """

    log_eta: float
    log_sigma: float
    log_ls: np.ndarray
    c: float = 10.0

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.log_ls, dtype=float))
        if ls.ndim != 1 or ls.size < 1:
            raise ValueError("log_ls must be a non-empty 1-d array")
        object.__setattr__(self, "log_ls", ls)
        vals = [self.log_eta, self.log_sigma, *ls, self.c]
        if not np.all(np.isfinite(vals)):
            raise ValueError("hyperparameters must be finite")
        if self.c < 0:
            raise ValueError("c must be non-negative")

    @property
    def eta(self) -> float:
        return math.exp(self.log_eta)

    @property
    def sigma(self) -> float:
        return math.exp(self.log_sigma)

    @property
    def ls(self) -> np.ndarray:
        return np.exp(self.log_ls)

    @property
    def n_params(self) -> int:
        return 2 + self.log_ls.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate(([self.log_eta, self.log_sigma], self.log_ls))

    @classmethod
    def from_vector(cls, vec, c: float = 10.0) -> "Hyperparams":
        vec = np.asarray(vec, dtype=float)
        if vec.ndim != 1 or vec.size < 3:
            raise ValueError("parameter vector must be [log_eta, log_sigma, log_ls...]")
        return cls(log_eta=float(vec[0]), log_sigma=float(vec[1]),
                   log_ls=vec[2:].copy(), c=c)


@dataclass(frozen=True)
class Dataset:
    """Regression data: inputs X (n, p) and targets y (n,)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be 2-d (n, p)")
        if y.ndim != 1 or y.size != X.shape[0]:
            raise ValueError("y must be 1-d with one entry per row of X")
        if X.shape[0] < 1:
            raise ValueError("dataset must contain at least one observation")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.X[idx].copy(), self.y[idx].copy())


@dataclass(frozen=True)
class PriorSpec:
    """Independent Gaussian priors on the log-scale parameters."""

    means: np.ndarray
    sds: np.ndarray

    def __post_init__(self):
        means = np.atleast_1d(np.asarray(self.means, dtype=float))
        sds = np.atleast_1d(np.asarray(self.sds, dtype=float))
        if means.shape != sds.shape or means.ndim != 1:
            raise ValueError("means and sds must be 1-d arrays of equal length")
        if np.any(sds <= 0) or not np.all(np.isfinite(means)) or not np.all(np.isfinite(sds)):
            raise ValueError("prior sds must be positive and finite")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)

    @classmethod
    def default(cls, n_params: int, mean: float = 0.0, sd: float = 3.0) -> "PriorSpec":
        return cls(np.full(n_params, float(mean)), np.full(n_params, float(sd)))

    @property
    def n_params(self) -> int:
        return self.means.size

    def log_density(self, vec) -> float:
        """Log prior density of a parameter vector, constants included."""
        vec = np.asarray(vec, dtype=float)
        if vec.shape != self.means.shape:
            raise ValueError("parameter vector does not match prior dimension")
        z = (vec - self.means) / self.sds
        return float(-0.5 * (z @ z) - np.log(self.sds).sum()
                     - 0.5 * self.means.size * LOG_2PI)


def infer_mode(theta: Hyperparams, p: int, mode: str | None = None) -> str:
    """Resolve 'iso'/'ard' from the length of log_ls, checking consistency."""
    L = theta.log_ls.size
    if L == 1:
        inferred = mode or "iso"
        if inferred == "ard" and p != 1:
            raise ValueError("ard mode needs one length scale per input dimension")
    elif L == p:
        inferred = mode or "ard"
        if inferred == "iso":
            raise ValueError("iso mode uses a single length scale")
    else:
        raise ValueError(f"log_ls has length {L}; expected 1 (iso) or p={p} (ard)")
    return inferred


def kernel_eval(xi, xj, theta: Hyperparams, mode: str | None = None) -> float:
    """Covariance K(xi, xj) between latent values at two input points (no noise)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xj = np.atleast_1d(np.asarray(xj, dtype=float))
    if xi.shape != xj.shape:
        raise ValueError("inputs must have the same dimension")
    infer_mode(theta, xi.size, mode)
    d2 = (xi - xj) ** 2
    ls2 = theta.ls ** 2
    expo = float((d2 / ls2).sum()) if theta.log_ls.size > 1 else float(d2.sum() / ls2[0])
    return theta.c ** 2 + theta.eta ** 2 * math.exp(-expo)


def sq_dists(X1, X2=None, per_dim: bool = False) -> np.ndarray:
    """Pairwise squared distances.

    Returns (n, m) summed over dimensions, or (p, n, m) per dimension when
    per_dim is set.  X2 defaults to X1.
    """
    X1 = np.asarray(X1, dtype=float)
    X2 = X1 if X2 is None else np.asarray(X2, dtype=float)
    diff = X1[:, None, :] - X2[None, :, :]
    sq = diff ** 2
    if per_dim:
        return np.moveaxis(sq, 2, 0).copy()
    return sq.sum(axis=2)


def kernel_matrix(theta: Hyperparams, d2: np.ndarray) -> np.ndarray:
    """Kernel matrix from precomputed squared distances (no noise term).

    d2 is (n, m) for a single shared length scale, or (p, n, m) with one
    slice per input dimension for ARD.
    """
    eta2 = theta.eta ** 2
    c2 = theta.c ** 2
    inv_ls2 = np.exp(-2.0 * theta.log_ls)
    if d2.ndim == 2:
        if theta.log_ls.size != 1:
            raise ValueError("summed distances require a single length scale")
        E = d2 * (-inv_ls2[0])
    elif d2.ndim == 3:
        if theta.log_ls.size != d2.shape[0]:
            raise ValueError("per-dimension distances do not match log_ls length")
        E = np.tensordot(-inv_ls2, d2, axes=1)
    else:
        raise ValueError("d2 must be (n, m) or (p, n, m)")
    np.exp(E, out=E)
    E *= eta2
    E += c2
    return E


def build_cov_matrix(data: Dataset, theta: Hyperparams, include_noise: bool = True,
                     mode: str | None = None) -> np.ndarray:
    """Covariance matrix of the observed targets (noise on the diagonal)."""
    mode = infer_mode(theta, data.p, mode)
    per_dim = theta.log_ls.size > 1
    C = kernel_matrix(theta, sq_dists(data.X, per_dim=per_dim))
    if include_noise:
        C[np.diag_indices_from(C)] += theta.sigma ** 2
    return C


def log_prior(theta: Hyperparams, prior: PriorSpec) -> float:
    """Log prior density of the sampled (log-scale) parameters."""
    return prior.log_density(theta.to_vector())
