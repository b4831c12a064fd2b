"""Autocorrelation-time estimation and efficiency reporting.

The cost of an MCMC method is measured as the product of the estimated
autocorrelation time of a monitored scalar (the data log likelihood) and the
average CPU time per iteration: the CPU cost of one effectively independent
draw.  Methods are compared by the ratio of their products to the standard
chain's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len


def acf(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelations rho_0..rho_max_lag, biased normalization.

    rho_i = c_i / c_0 with c_i = (1/L) sum_t (x_t - xbar)(x_{t+i} - xbar);
    the 1/L convention (rather than 1/(L-i)) keeps the estimates of a
    finite series summable.  Computed by FFT.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("series must be 1-d with at least two points")
    L = x.size
    if not 0 <= max_lag < L:
        raise ValueError("need 0 <= max_lag < len(series)")
    xc = x - x.mean()
    c0 = float(xc @ xc) / L
    if c0 == 0.0:
        raise ValueError("series is constant; autocorrelations undefined")
    nfft = next_fast_len(2 * L)
    f = np.fft.rfft(xc, nfft)
    ac = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1] / L
    return ac / ac[0]


def act_estimate(series) -> tuple[float, int]:
    """Autocorrelation time tau = 1 + 2 sum_{i<=k} rho_i, with k chosen as
    the smallest lag whose next two autocorrelations are statistically
    indistinguishable from zero (inside +-1.96/sqrt(L)); k is capped at L/3.

    Returns (tau_hat, k).
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 9:
        raise ValueError("series too short for an autocorrelation time")
    L = x.size
    cap = L // 3
    max_lag = min(cap + 2, L - 1)
    rho = acf(x, max_lag)
    band = 1.96 / math.sqrt(L)
    k = cap
    for cand in range(0, cap + 1):
        if cand + 2 >= rho.size:
            break
        if abs(rho[cand + 1]) < band and abs(rho[cand + 2]) < band:
            k = cand
            break
    tau = 1.0 + 2.0 * float(rho[1 : k + 1].sum())
    return tau, k


@dataclass
class ChainTrace:
    """Per-iteration record of one chain run.

    theta is (L, d) in the order [log_eta, log_sigma, log_ls...]; log_lik is
    the data log likelihood (prior excluded); cpu_seconds the CPU time each
    iteration took; the eval columns count density evaluations made during
    that iteration.  meta carries method identity and run configuration.
    """

    theta: np.ndarray
    log_lik: np.ndarray
    cpu_seconds: np.ndarray
    exact_evals: np.ndarray
    surrogate_evals: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        self.log_lik = np.asarray(self.log_lik, dtype=float)
        self.cpu_seconds = np.asarray(self.cpu_seconds, dtype=float)
        self.exact_evals = np.asarray(self.exact_evals, dtype=int)
        self.surrogate_evals = np.asarray(self.surrogate_evals, dtype=int)
        L = self.theta.shape[0]
        for name in ("log_lik", "cpu_seconds", "exact_evals", "surrogate_evals"):
            if getattr(self, name).shape != (L,):
                raise ValueError(f"{name} must have one entry per iteration")

    @property
    def n_iterations(self) -> int:
        return self.theta.shape[0]

    def label(self) -> str:
        return str(self.meta.get("method", "unknown"))


@dataclass
class EfficiencyRow:
    method: str
    m_label: str
    tau: float
    cutoff_lag: int
    cpu_per_iter: float
    product: float
    ratio: float | None
    param_taus: list[float]


@dataclass
class EfficiencyReport:
    rows: list[EfficiencyRow]
    burn_in_fraction: float
    no_baseline: bool


def efficiency_report(traces, burn_in_fraction: float = 1.0 / 3.0) -> EfficiencyReport:
    """Autocorrelation-time x CPU-time table for a set of chain traces.

    The first burn_in_fraction of each trace is discarded; tau is estimated
    on the log-likelihood series; ratios are taken against the first trace
    whose method is 'standard' (report is flagged when there is none).
    Per-parameter autocorrelation times are included as supplementary
    columns.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    if not 0.0 <= burn_in_fraction < 1.0:
        raise ValueError("burn_in_fraction must be in [0, 1)")

    rows = []
    for t in traces:
        start = int(math.floor(t.n_iterations * burn_in_fraction))
        ll = t.log_lik[start:]
        tau, k = act_estimate(ll)
        cpu = float(t.cpu_seconds[start:].mean())
        ptaus = [act_estimate(t.theta[start:, j])[0]
                 for j in range(t.theta.shape[1])]
        m = t.meta.get("m_label", t.meta.get("m", ""))
        rows.append(EfficiencyRow(method=t.label(), m_label=str(m), tau=tau,
                                  cutoff_lag=k, cpu_per_iter=cpu,
                                  product=tau * cpu, ratio=None,
                                  param_taus=ptaus))

    base = next((r for r in rows if r.method == "standard"), None)
    if base is not None:
        for r in rows:
            r.ratio = r.product / base.product
    return EfficiencyReport(rows=rows, burn_in_fraction=burn_in_fraction,
                            no_baseline=base is None)


def report_to_text(report: EfficiencyReport) -> str:
    """Aligned text table, one row per method."""
    header = ["method", "m", "tau", "time/iter(s)", "product", "ratio"]
    lines = [header]
    for r in report.rows:
        lines.append([r.method, r.m_label or "-", f"{r.tau:.2f}",
                      f"{r.cpu_per_iter:.6f}", f"{r.product:.6f}",
                      "-" if r.ratio is None else f"{r.ratio:.3f}"])
    widths = [max(len(row[j]) for row in lines) for j in range(len(header))]
    out = []
    for row in lines:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    if report.no_baseline:
        out.append("(no standard baseline; ratios unavailable)")
    sup = ["per-parameter tau:"]
    for r in report.rows:
        taus = ", ".join(f"{t:.2f}" for t in r.param_taus)
        sup.append(f"  {r.method}: {taus}")
    return "\n".join(out + sup)


def report_to_csv(report: EfficiencyReport, path) -> None:
    """CSV mirror of the table (method, m, tau, time/iter, product, ratio)."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "m", "tau", "cpu_per_iter", "product", "ratio"])
        for r in report.rows:
            writer.writerow([r.method, r.m_label, repr(r.tau),
                             repr(r.cpu_per_iter), repr(r.product),
                             "" if r.ratio is None else repr(r.ratio)])
