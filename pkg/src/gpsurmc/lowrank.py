"""Gaussian log densities for low-rank-plus-diagonal covariances.

Covariances of the form C = B S B' + D with B (n, m), S (m, m) symmetric
positive definite (often diagonal) and D a positive diagonal never need to be
formed or factored at size n.  The Woodbury identity gives

    C^-1 = D^-1 - D^-1 B (S^-1 + B' D^-1 B)^-1 B' D^-1

and the matrix determinant lemma gives

    det(C) = det(S^-1 + B' D^-1 B) det(D) det(S)

so quadratic form and determinant both cost O(n m^2 + m^3).  When B has
orthonormal columns, S is diagonal, and D = d I, the inner solve collapses to

    C^-1 = (1/d) I - B diag(s_j / (d (s_j + d))) B'

which this module uses as a separate fast path; both paths are kept and
cross-checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import CholFactor, cholesky_spd
from .model import LOG_2PI

from scipy import linalg as sla


@dataclass
class LowRankPlusDiag:
    """C = B S B' + D.

    S is stored as a vector (diagonal) or a full (m, m) SPD matrix.  d is a
    scalar or an (n,) vector giving the diagonal of D.  orthonormal declares
    that B's columns are orthonormal, enabling the diagonal fast path when S
    is also diagonal and d scalar.
    """

    B: np.ndarray
    S: np.ndarray
    d: float | np.ndarray
    orthonormal: bool = False

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        S = np.asarray(self.S, dtype=float)
        if B.ndim != 2:
            raise ValueError("B must be (n, m)")
        m = B.shape[1]
        if S.ndim == 1:
            if S.size != m:
                raise ValueError("diagonal S must have one entry per column of B")
            if np.any(S < 0):
                raise ValueError("diagonal S must be non-negative")
        elif S.ndim == 2:
            if S.shape != (m, m):
                raise ValueError("dense S must be (m, m)")
        else:
            raise ValueError("S must be a vector or a square matrix")
        d = np.asarray(self.d, dtype=float)
        if d.ndim == 0:
            if d <= 0:
                raise ValueError("d must be positive")
        elif d.ndim == 1:
            if d.size != B.shape[0] or np.any(d <= 0):
                raise ValueError("diagonal d must be positive with one entry per row")
        else:
            raise ValueError("d must be scalar or (n,)")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def _diag_fast_path(self) -> bool:
        return self.orthonormal and self.S.ndim == 1 and np.ndim(self.d) == 0


@dataclass
class InnerFactor:
    """Factorization of the inner m x m matrix M = S^-1 + B' D^-1 B.

    Either a Cholesky factor of M (general path) or, on the orthonormal
    fast path where M is diagonal, the correction weights s_j/(d (s_j + d));
    zero modes get weight 0 and drop out.
    """

    chol: CholFactor | None = None
    diag: np.ndarray | None = None


def _inner_factor(lr: LowRankPlusDiag) -> InnerFactor:
    if lr._diag_fast_path():
        d = float(lr.d)
        s = lr.S
        return InnerFactor(diag=np.where(s > 0, s / (d * (s + d)), 0.0))
    d = lr.d
    Bd = lr.B / d[:, None] if np.ndim(d) == 1 else lr.B / float(d)
    M = lr.B.T @ Bd
    if lr.S.ndim == 1:
        if np.any(lr.S <= 0):
            raise ValueError("general path requires strictly positive diagonal S")
        M[np.diag_indices_from(M)] += 1.0 / lr.S
    else:
        S_fac = cholesky_spd(lr.S)
        S_inv = sla.cho_solve((S_fac.upper, False), np.eye(lr.m),
                              check_finite=False)
        M += S_inv
    return InnerFactor(chol=cholesky_spd(M))


def quad_form(lr: LowRankPlusDiag, y) -> tuple[float, InnerFactor]:
    """y' C^-1 y by Woodbury; returns the inner factorization for reuse."""
    y = np.asarray(y, dtype=float)
    if y.shape != (lr.n,):
        raise ValueError("y must be (n,)")
    aux = _inner_factor(lr)
    if aux.diag is not None:
        d = float(lr.d)
        t = lr.B.T @ y
        return float((y @ y) / d - t @ (aux.diag * t)), aux
    d = lr.d
    z = y / d if np.ndim(d) == 1 else y / float(d)
    t = lr.B.T @ z
    u = sla.solve_triangular(aux.chol.upper, t, trans=1, lower=False,
                             check_finite=False)
    return float(y @ z - u @ u), aux


def log_det(lr: LowRankPlusDiag, aux: InnerFactor | None = None) -> float:
    """log det(B S B' + D) by the determinant lemma."""
    if aux is None:
        aux = _inner_factor(lr)
    if np.ndim(lr.d) == 1:
        logdet_D = float(np.log(lr.d).sum())
    else:
        logdet_D = lr.n * float(np.log(lr.d))
    if aux.diag is not None:
        s = lr.S
        d = float(lr.d)
        # log(M_jj) + log(s_j) telescopes to log(s_j + d) - log(d); zero
        # modes drop out entirely.
        terms = np.where(s > 0, np.log(s + d) - np.log(d), 0.0)
        return float(terms.sum()) + logdet_D
    logdet_M = aux.chol.log_det
    if lr.S.ndim == 1:
        logdet_S = float(np.log(lr.S).sum())
    else:
        logdet_S = cholesky_spd(lr.S).log_det
    return logdet_M + logdet_D + logdet_S


def log_density(lr: LowRankPlusDiag, y) -> float:
    """Log N(y | 0, B S B' + D), computing the inner factorization once."""
    quad, aux = quad_form(lr, y)
    return float(-0.5 * quad - 0.5 * log_det(lr, aux) - 0.5 * lr.n * LOG_2PI)
