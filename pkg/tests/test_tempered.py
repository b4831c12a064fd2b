"""Tempered transitions: trajectory structure, the acceptance sum, detailed
balance of the composite kernel, and agreement with the marked-chain scheme.
"""

import math
from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from gpsurmc import (Ladder, LadderLevel, MapChainConfig, SliceConfig,
                     flip_log_acceptance, ladder_validate, map_to_chain,
                     mark_log_ratio, sweep, tempered_transition)

from conftest import ScriptedRng


def std_normal(x):
    return float(-0.5 * x[0] ** 2)


def scaled_normal(scale):
    def dens(x):
        return float(-0.5 * (x[0] / scale) ** 2)
    return dens


class Counting:
    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.fn(x)


class TestTrajectoryStructure:
    def test_path_layout_and_replay(self):
        # n = 2 ladder, one sweep per level: the five recorded states must
        # be exactly the sweep outputs in up-then-down order
        lvl1 = scaled_normal(1.2)
        lvl2 = scaled_normal(1.5)
        ladder = Ladder(base=std_normal,
                        levels=[LadderLevel(lvl1), LadderLevel(lvl2)],
                        slice=SliceConfig(w=1.5))
        x = np.array([0.4])
        res = tempered_transition(x, ladder, np.random.default_rng(11),
                                  log_base_x=std_normal(x))
        assert len(res.path) == 5
        assert_allclose(res.path[0], x, rtol=0)

        rng = np.random.default_rng(11)
        cfg = SliceConfig(w=1.5)
        h1, v1 = sweep(x, lvl1, cfg, rng, order="ascending", log_fx=lvl1(x))
        h2, v2 = sweep(h1, lvl2, cfg, rng, order="ascending", log_fx=lvl2(h1))
        c1, u2 = sweep(h2, lvl2, cfg, rng, order="descending", log_fx=v2)
        c0, u1 = sweep(c1, lvl1, cfg, rng, order="descending", log_fx=lvl1(c1))
        assert_allclose(res.path[1], h1, rtol=0)
        assert_allclose(res.path[2], h2, rtol=0)
        assert_allclose(res.path[3], c1, rtol=0)
        assert_allclose(res.path[4], c0, rtol=0)

    def test_threaded_sum_matches_reference(self):
        levels = [scaled_normal(1.2), scaled_normal(1.6), scaled_normal(2.2)]
        ladder = Ladder(base=std_normal,
                        levels=[LadderLevel(d, sweeps=2) for d in levels],
                        slice=SliceConfig(w=2.0))
        for seed in range(8):
            x = np.array([0.3 * seed - 1.0])
            res = tempered_transition(x, ladder, np.random.default_rng(seed),
                                      log_base_x=std_normal(x))
            ref = flip_log_acceptance(res.path, [std_normal] + levels)
            assert res.log_acc == ref

    def test_multi_sweep_counts(self):
        # sweeps per level are honored: path still 2n+1 states, but each
        # hop is the composition of k sweeps
        lvl = scaled_normal(1.4)
        ladder = Ladder(base=std_normal, levels=[LadderLevel(lvl, sweeps=3)],
                        slice=SliceConfig())
        x = np.array([0.1])
        res = tempered_transition(x, ladder, np.random.default_rng(2),
                                  log_base_x=std_normal(x))
        rng = np.random.default_rng(2)
        cur, val = x, lvl(x)
        for _ in range(3):
            cur, val = sweep(cur, lvl, SliceConfig(), rng,
                             order="ascending", log_fx=val)
        assert_allclose(res.path[1], cur, rtol=0)

    def test_accept_reject_bookkeeping(self):
        lvl = scaled_normal(3.0)
        ladder = Ladder(base=std_normal, levels=[LadderLevel(lvl)],
                        slice=SliceConfig(w=2.0))
        x = np.array([0.2])
        seen = {True: 0, False: 0}
        rng = np.random.default_rng(14)
        for _ in range(200):
            res = tempered_transition(x, ladder, rng, log_base_x=std_normal(x))
            seen[res.accepted] += 1
            if res.accepted:
                assert_allclose(res.state, res.path[-1], rtol=0)
                assert res.log_base == std_normal(res.state)
            else:
                assert_allclose(res.state, x, rtol=0)
                assert res.log_base == std_normal(x)
        assert seen[True] > 0 and seen[False] > 0

    def test_one_exact_eval_when_threaded(self):
        base = Counting(std_normal)
        ladder = Ladder(base=base, levels=[LadderLevel(scaled_normal(1.3))])
        x = np.array([0.0])
        lb = std_normal(x)
        rng = np.random.default_rng(3)
        for _ in range(10):
            res = tempered_transition(x, ladder, rng, log_base_x=lb)
            x, lb = res.state, res.log_base
        assert base.calls == 10
        tempered_transition(x, ladder, rng)  # without the hint: one extra
        assert base.calls == 12

    def test_non_finite_up_pass_flags_rejection(self):
        def broken(v):
            return -math.inf

        ladder = Ladder(base=std_normal, levels=[LadderLevel(broken)])
        x = np.array([0.3])
        res = tempered_transition(x, ladder, np.random.default_rng(0),
                                  log_base_x=std_normal(x))
        assert res.flag == "non-finite"
        assert not res.accepted
        assert res.log_acc == -math.inf
        assert_allclose(res.state, x, rtol=0)

    def test_non_finite_start_raises(self):
        ladder = Ladder(base=lambda v: -math.inf,
                        levels=[LadderLevel(std_normal)])
        with pytest.raises(ValueError):
            tempered_transition(np.array([0.0]), ladder,
                                np.random.default_rng(0))

    def test_validation(self):
        with pytest.raises(ValueError):
            Ladder(base=std_normal, levels=[])
        with pytest.raises(ValueError):
            LadderLevel(std_normal, sweeps=0)
        with pytest.raises(ValueError):
            flip_log_acceptance([np.zeros(1)] * 4, [std_normal] * 3)


class TestDetailedBalance:
    """The acceptance sum must make the full up-down trajectory satisfy
    detailed balance for the exact target.  Checked by brute force on a
    five-state space with Metropolis level dynamics, enumerating every
    trajectory."""

    def test_five_state_enumeration(self):
        gen = np.random.default_rng(301)
        S = 5
        pis = [gen.uniform(0.2, 2.0, S) for _ in range(3)]  # pi_0, pi_1, pi_2
        logd = [lambda s, p=p: float(math.log(p[s])) for p in pis]

        def metro(p):
            # uniform proposal over all states, Metropolis acceptance
            T = np.zeros((S, S))
            for a in range(S):
                for b in range(S):
                    if a != b:
                        T[a, b] = min(1.0, p[b] / p[a]) / S
                T[a, a] = 1.0 - T[a].sum()
            return T

        T1, T2 = metro(pis[1]), metro(pis[2])
        # composite transition x -> y: up through T1 then T2, down through
        # T2 then T1, accept with min(1, exp(flip_log_acceptance))
        K = np.zeros((S, S))
        for x in range(S):
            for h1 in range(S):
                for h2 in range(S):
                    for c1 in range(S):
                        for c0 in range(S):
                            prob = T1[x, h1] * T2[h1, h2] * T2[h2, c1] * T1[c1, c0]
                            if prob == 0.0:
                                continue
                            la = flip_log_acceptance([x, h1, h2, c1, c0], logd)
                            a = min(1.0, math.exp(la))
                            K[x, c0] += prob * a
                            K[x, x] += prob * (1.0 - a)
        assert_allclose(K.sum(axis=1), 1.0, rtol=1e-12)
        pi0 = pis[0] / pis[0].sum()
        flux = pi0[:, None] * K
        assert_allclose(flux, flux.T, rtol=0, atol=1e-14)


class TestEquivalenceWithMarkedChain:
    """With one ladder level, k up and k down sweeps, a tempered transition
    is the marked-chain transition with stride 2k: same trajectory, same
    acceptance sum, bit for bit, when fed the same draws."""

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_same_seed_same_path(self, k):
        sur = scaled_normal(1.4)
        cfg = SliceConfig(w=1.7, max_steps=8)
        for seed in range(12):
            x = np.array([0.25 * seed - 1.2])

            ladder = Ladder(base=std_normal, levels=[LadderLevel(sur, sweeps=k)],
                            slice=cfg)
            res = tempered_transition(x, ladder, np.random.default_rng(seed),
                                      log_base_x=std_normal(x))

            rng = np.random.default_rng(seed)
            chain = map_to_chain(x, std_normal, sur,
                                 log_exact_x=std_normal(x), log_sur_x=sur(x))
            chain.extend_to(2 * k, sur, cfg, rng)
            log_acc = mark_log_ratio(chain, 2 * k, std_normal)

            assert log_acc == res.log_acc
            assert chain.state(2 * k)[0] == res.path[-1][0]
            accept = log_acc >= 0.0 or math.log(rng.random()) < log_acc
            assert accept == res.accepted


class _Handle:
    """Minimal callable with the attributes ladder_validate inspects."""

    def __init__(self, fn, cost, dim):
        self.fn = fn
        self.cost_units = cost
        if dim is not None:
            self.dim = dim

    def __call__(self, v):
        return self.fn(v)


class TestLadderValidate:
    def test_reports_gaps_and_costs(self):
        base = _Handle(lambda v: 1.0, cost=1000.0, dim=2)
        near = _Handle(lambda v: 1.25, cost=100.0, dim=2)
        far = _Handle(lambda v: 4.0, cost=10.0, dim=2)
        ladder = Ladder(base=base, levels=[LadderLevel(near), LadderLevel(far)])
        report = ladder_validate(ladder, SimpleNamespace(n=5))
        assert len(report.levels) == 2
        assert report.levels[0].gap == 0.25
        assert report.levels[1].gap == 3.0
        assert report.levels[0].cost_units == 100.0
        assert report.warnings == []

    def test_warns_on_non_decreasing_cost(self):
        base = _Handle(lambda v: 0.0, cost=1000.0, dim=2)
        pricey = _Handle(lambda v: 0.5, cost=2000.0, dim=2)
        ladder = Ladder(base=base, levels=[LadderLevel(pricey)])
        report = ladder_validate(ladder, SimpleNamespace(n=5))
        assert len(report.warnings) == 1
        assert "not lower" in report.warnings[0]

    def test_probe_defaults_to_zero_vector(self):
        seen = []

        def probe_recorder(v):
            seen.append(np.array(v, copy=True))
            return 0.0

        base = _Handle(probe_recorder, cost=10.0, dim=4)
        ladder = Ladder(base=base, levels=[LadderLevel(_Handle(lambda v: 0.0,
                                                               cost=1.0, dim=4))])
        ladder_validate(ladder, SimpleNamespace(n=3))
        assert_allclose(seen[0], np.zeros(4), rtol=0)

    def test_requires_data_and_dim(self):
        base = _Handle(lambda v: 0.0, cost=None, dim=None)
        ladder = Ladder(base=base, levels=[LadderLevel(base)])
        with pytest.raises(ValueError):
            ladder_validate(ladder, None)
        with pytest.raises(ValueError):
            ladder_validate(ladder, SimpleNamespace(n=0))
        with pytest.raises(ValueError):
            ladder_validate(ladder, SimpleNamespace(n=3))
        report = ladder_validate(ladder, SimpleNamespace(n=3),
                                 theta_probe=np.zeros(2))
        assert report.levels[0].gap == 0.0


class TestInvariance:
    def test_normal_target_two_level_ladder(self):
        gen = np.random.default_rng(8845)
        ladder = Ladder(base=std_normal,
                        levels=[LadderLevel(scaled_normal(1.25)),
                                LadderLevel(scaled_normal(1.6))],
                        slice=SliceConfig(w=2.0))
        x = np.array([gen.standard_normal()])
        lb = std_normal(x)
        draws = np.empty(2000)
        for i in range(40_000):
            res = tempered_transition(x, ladder, gen, log_base_x=lb)
            x, lb = res.state, res.log_base
            if i % 20 == 19:
                draws[i // 20] = x[0]
        p = stats.kstest(draws, stats.norm().cdf).pvalue
        assert p > 0.001, f"KS p={p:.2e}"
