"""Shared test helpers: dense reference computations and random instances."""

import math

import numpy as np
import pytest

# populated by tests/test_acceptance.py; printed after the run
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}: {detail}")


def dense_gauss_logpdf(y, C):
    """Log N(y | 0, C) via explicit inverse and determinant."""
    y = np.asarray(y, dtype=float)
    n = y.size
    Cinv = np.linalg.inv(C)
    sign, logdet = np.linalg.slogdet(C)
    assert sign > 0
    return float(-0.5 * (y @ Cinv @ y) - 0.5 * logdet
                 - 0.5 * n * math.log(2.0 * math.pi))


def dense_cov_oracle(X, vec, c, include_noise=True):
    """Covariance matrix by an explicit double loop over kernel values."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    log_eta, log_sigma = vec[0], vec[1]
    ls = np.exp(np.asarray(vec[2:], dtype=float))
    if ls.size == 1:
        ls = np.full(p, ls[0])
    C = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            d2 = ((X[i] - X[j]) ** 2 / ls ** 2).sum()
            C[i, j] = c ** 2 + math.exp(2 * log_eta) * math.exp(-d2)
    if include_noise:
        C += math.exp(2 * log_sigma) * np.eye(n)
    return C


def random_theta_vec(rng, dim=3, spread=0.6):
    """Moderate random log-scale parameters, kernels well conditioned."""
    vec = np.empty(dim)
    vec[0] = rng.uniform(-0.5, 1.0)          # log eta
    vec[1] = rng.uniform(-1.5, -0.3)         # log sigma
    vec[2:] = rng.uniform(-spread, spread, dim - 2)  # log length scales
    return vec


class ScriptedRng:
    """Deterministic stand-in for a Generator: replays queued draws."""

    def __init__(self, randoms):
        self._randoms = list(randoms)

    def random(self):
        return self._randoms.pop(0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)
