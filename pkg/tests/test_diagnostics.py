"""Autocorrelation estimates against direct oracles, and report arithmetic."""

import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import signal

from gpsurmc import (ChainTrace, acf, act_estimate, efficiency_report,
                     report_to_csv, report_to_text)


def acf_direct(x, max_lag):
    """Definitional O(L^2) autocorrelation with the 1/L normalization."""
    x = np.asarray(x, dtype=float)
    L = x.size
    xc = x - x.mean()
    c = np.array([(xc[: L - i] @ xc[i:]) / L for i in range(max_lag + 1)])
    return c / c[0]


def ar1(phi, L, seed):
    innov = np.random.default_rng(seed).standard_normal(L)
    return signal.lfilter([1.0], [1.0, -phi], innov)


class TestAcf:
    def test_matches_direct_computation(self, rng):
        for L in (2, 3, 17, 100, 513):
            x = rng.standard_normal(L)
            lag = min(L - 1, 40)
            assert_allclose(acf(x, lag), acf_direct(x, lag), rtol=1e-10,
                            atol=1e-12)

    def test_ar_series_against_direct(self, rng):
        x = ar1(0.7, 4000, 5)
        assert_allclose(acf(x, 200), acf_direct(x, 200), rtol=1e-9, atol=1e-12)

    def test_alternating_closed_form(self):
        # x = +-1 repeating, mean 0: rho_i = (-1)^i (L - i) / L
        L = 16
        x = np.tile([1.0, -1.0], L // 2)
        got = acf(x, 5)
        expected = [(-1.0) ** i * (L - i) / L for i in range(6)]
        assert_allclose(got, expected, rtol=1e-12)

    def test_lag_zero_is_one(self, rng):
        assert acf(rng.standard_normal(50), 0)[0] == 1.0

    def test_affine_invariance_exact(self):
        # integer series of power-of-two length: scaling by a power of two
        # and shifting by an integer must not change a single bit
        gen = np.random.default_rng(31)
        x = gen.integers(-20, 21, size=512).astype(float)
        base = acf(x, 100)
        shifted = acf(x + 7.0, 100)
        scaled = acf(8.0 * x, 100)
        both = acf(8.0 * x - 64.0 * 7.0, 100)
        assert np.array_equal(base, shifted)
        assert np.array_equal(base, scaled)
        assert np.array_equal(base, both)

    def test_validation(self, rng):
        with pytest.raises(ValueError):
            acf(np.ones(10), 3)  # constant
        with pytest.raises(ValueError):
            acf(np.array([1.0]), 0)  # too short
        with pytest.raises(ValueError):
            acf(rng.standard_normal(10), 10)  # lag out of range
        with pytest.raises(ValueError):
            acf(rng.standard_normal(10), -1)


class TestActEstimate:
    def test_iid_is_exactly_one(self):
        x = np.random.default_rng(77).standard_normal(5000)
        tau, k = act_estimate(x)
        assert tau == 1.0 and k == 0

    def test_ar1_theory_moderate(self):
        # tau = (1 + phi) / (1 - phi)
        tau, _ = act_estimate(ar1(0.5, 30_000, 12))
        assert abs(tau - 3.0) / 3.0 < 0.15
        tau, _ = act_estimate(ar1(0.8, 100_000, 13))
        assert abs(tau - 9.0) / 9.0 < 0.15

    def test_cutoff_cap_and_closed_form(self):
        # alternating series never drops inside the band, so k hits the cap
        # and the truncated sum telescopes: tau = 1 - 2 * (cap/2) / L = 2/3
        L = 30
        x = np.tile([1.0, -1.0], L // 2)
        tau, k = act_estimate(x)
        assert k == L // 3
        assert_allclose(tau, 2.0 / 3.0, rtol=1e-12)

    def test_cutoff_choice_is_first_eligible(self):
        # iid noise plus one strong lag-1 component: k should stay small
        gen = np.random.default_rng(99)
        x = ar1(0.3, 20_000, 41)
        tau, k = act_estimate(x)
        band = 1.96 / math.sqrt(x.size)
        rho = acf(x, k + 2)
        assert abs(rho[k + 1]) < band and abs(rho[k + 2]) < band

    def test_too_short(self):
        with pytest.raises(ValueError):
            act_estimate(np.arange(8, dtype=float))


def make_trace(log_lik, cpu, method, theta=None, m_label=None):
    L = len(log_lik)
    theta = np.asarray(theta) if theta is not None else \
        np.column_stack([np.asarray(log_lik)] * 3)
    meta = {"method": method}
    if m_label is not None:
        meta["m_label"] = m_label
    return ChainTrace(theta=theta, log_lik=np.asarray(log_lik),
                      cpu_seconds=np.full(L, cpu),
                      exact_evals=np.ones(L, dtype=int),
                      surrogate_evals=np.zeros(L, dtype=int), meta=meta)


class TestChainTrace:
    def test_validation(self):
        with pytest.raises(ValueError):
            ChainTrace(theta=np.zeros((5, 2)), log_lik=np.zeros(4),
                       cpu_seconds=np.zeros(5), exact_evals=np.zeros(5),
                       surrogate_evals=np.zeros(5))
        with pytest.raises(ValueError):
            ChainTrace(theta=np.zeros((5, 2)), log_lik=np.zeros(5),
                       cpu_seconds=np.zeros(3), exact_evals=np.zeros(5),
                       surrogate_evals=np.zeros(5))

    def test_label_and_length(self, rng):
        t = make_trace(rng.standard_normal(20), 0.5, "standard")
        assert t.label() == "standard"
        assert t.n_iterations == 20
        assert make_trace(rng.standard_normal(5), 0.1, None).label() != ""


class TestEfficiencyReport:
    def test_identical_series_cpu_ratio(self, rng):
        ll = ar1(0.6, 3000, 21)
        t1 = make_trace(ll, 1.0, "standard")
        t2 = make_trace(ll, 0.25, "mapchain", m_label="m=10")
        report = efficiency_report([t1, t2])
        r1, r2 = report.rows
        assert r1.tau == r2.tau
        assert r1.ratio == 1.0
        assert r2.ratio == 0.25
        assert r2.product == r2.tau * 0.25
        assert not report.no_baseline
        assert r2.m_label == "m=10"

    def test_burn_in_discard(self, rng):
        # wild ramp for the first third, clean noise after: tau must be
        # computed on the tail only
        L = 3000
        tail = np.random.default_rng(55).standard_normal(2000)
        ll = np.concatenate([np.linspace(0, 500, 1000), tail])
        t = make_trace(ll, 1.0, "standard")
        report = efficiency_report([t], burn_in_fraction=1.0 / 3.0)
        expected_tau, expected_k = act_estimate(ll[1000:])
        assert report.rows[0].tau == expected_tau
        assert report.rows[0].cutoff_lag == expected_k

    def test_zero_burn_in(self, rng):
        ll = ar1(0.4, 1200, 8)
        report = efficiency_report([make_trace(ll, 0.5, "standard")],
                                   burn_in_fraction=0.0)
        assert report.rows[0].tau == act_estimate(ll)[0]

    def test_no_baseline_flag(self, rng):
        ll = ar1(0.4, 1200, 9)
        report = efficiency_report([make_trace(ll, 1.0, "mapchain")])
        assert report.no_baseline
        assert report.rows[0].ratio is None
        assert "no standard baseline" in report_to_text(report)

    def test_per_parameter_taus(self, rng):
        L = 1500
        theta = np.column_stack([ar1(0.5, L, 1), ar1(0.2, L, 2)])
        t = ChainTrace(theta=theta, log_lik=ar1(0.3, L, 3),
                       cpu_seconds=np.full(L, 0.1),
                       exact_evals=np.ones(L, dtype=int),
                       surrogate_evals=np.zeros(L, dtype=int),
                       meta={"method": "standard"})
        report = efficiency_report([t])
        row = report.rows[0]
        assert len(row.param_taus) == 2
        start = int(math.floor(L / 3.0))
        assert row.param_taus[0] == act_estimate(theta[start:, 0])[0]
        assert row.param_taus[1] == act_estimate(theta[start:, 1])[0]

    def test_validation(self):
        with pytest.raises(ValueError):
            efficiency_report([])
        with pytest.raises(ValueError):
            efficiency_report([make_trace(np.random.default_rng(0)
                                          .standard_normal(30), 1.0, "x")],
                              burn_in_fraction=1.0)


class TestReportOutput:
    def test_text_table_is_aligned(self, rng):
        ll = ar1(0.5, 1200, 30)
        report = efficiency_report([make_trace(ll, 1.0, "standard"),
                                    make_trace(ll, 0.5, "tempered",
                                               m_label="(20,10)")])
        text = report_to_text(report)
        lines = text.splitlines()
        assert lines[0].split() == ["method", "m", "tau", "time/iter(s)",
                                    "product", "ratio"]
        assert lines[1].startswith("standard")
        assert lines[2].startswith("tempered")
        assert "per-parameter tau:" in text

    def test_csv_round_trip(self, rng, tmp_path):
        ll = ar1(0.5, 1200, 31)
        report = efficiency_report([make_trace(ll, 1.0, "standard"),
                                    make_trace(ll, 2.0, "eigen")])
        path = tmp_path / "report.csv"
        report_to_csv(report, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["method", "m", "tau", "cpu_per_iter", "product",
                           "ratio"]
        assert rows[1][0] == "standard"
        assert float(rows[1][2]) == report.rows[0].tau
        assert float(rows[2][4]) == report.rows[1].product
        assert float(rows[1][5]) == 1.0
