"""Tempered transitions through a ladder of cheap approximate densities.

A ladder orders densities pi_0 (the exact posterior, held by the ladder as
`base`), pi_1, ..., pi_n from exact to coarsest.  One transition runs an
up pass (k_i ascending slice sweeps targeting pi_i, for i = 1..n) followed
by a down pass (k_i descending sweeps targeting pi_i, for i = n..1), then
accepts or rejects the whole trajectory with log acceptance

    sum_{i=1..n} [log pi_i(xhat_{i-1}) - log pi_{i-1}(xhat_{i-1})]
  + sum_{i=n..1} [log pi_{i-1}(xcheck_{i-1}) - log pi_i(xcheck_{i-1})]

where xhat_{i-1} is the state entering the level-i up move and xcheck_{i-1}
the state leaving the level-i down move.  Up and down moves are mutually
reversible by construction (the descending sweep is the reversal of the
ascending sweep), so no correction factors appear in the sum.

Every density value in the sum falls out of the sweeps themselves except
log pi_0 at the proposal endpoint, so a transition costs exactly one new
exact evaluation when the value at the current point is threaded in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .slice_sampler import SliceConfig, sweep


@dataclass
class LadderLevel:
    """One rung: a density handle and its per-pass sweep count k_i."""

    density: object
    sweeps: int = 1

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweep count must be at least 1")


@dataclass
class Ladder:
    """base is the exact density (level 0); levels run cheapest-last."""

    base: object
    levels: list[LadderLevel]
    slice: SliceConfig = field(default_factory=SliceConfig)

    def __post_init__(self):
        if not self.levels:
            raise ValueError("ladder needs at least one level above the base")

    @property
    def n_levels(self) -> int:
        return len(self.levels)


@dataclass
class TemperedResult:
    state: np.ndarray
    accepted: bool
    log_acc: float
    log_base: float
    path: list[np.ndarray]
    flag: str | None = None


def flip_log_acceptance(path, log_densities) -> float:
    """Acceptance sum recomputed from scratch for a recorded trajectory.

    path = [xhat_0, ..., xhat_{n-1}, xbar_n, xcheck_{n-1}, ..., xcheck_0]
    (2n + 1 states) and log_densities = [pi_0, ..., pi_n] as callables.
    Reference implementation used to cross-check the threaded computation.
    """
    n = len(log_densities) - 1
    if len(path) != 2 * n + 1:
        raise ValueError("path must hold 2n + 1 states")
    total = 0.0
    for i in range(1, n + 1):
        xhat = path[i - 1]
        total += log_densities[i](xhat) - log_densities[i - 1](xhat)
    for i in range(n, 0, -1):
        xcheck = path[2 * n - (i - 1)]
        total += log_densities[i - 1](xcheck) - log_densities[i](xcheck)
    return float(total)


def tempered_transition(x, ladder: Ladder, rng,
                        log_base_x: float | None = None) -> TemperedResult:
    """One tempered transition from x.  Returns the accepted-or-held state.

    log_base_x, when given, must equal ladder.base(x) and saves the exact
    evaluation at the current point.  Non-finite density values anywhere on
    the trajectory reject it with a diagnostic flag.
    """
    x = np.asarray(x, dtype=float)
    lp0 = float(ladder.base(x)) if log_base_x is None else float(log_base_x)
    if not math.isfinite(lp0):
        raise ValueError("exact log density must be finite at the current point")

    n = ladder.n_levels
    log_acc = 0.0
    path = [x.copy()]
    cur = x
    prev_val = lp0  # log pi_{i-1} at the state entering level i
    ok = True

    for level in ladder.levels:
        enter_val = float(level.density(cur))
        if not math.isfinite(enter_val):
            ok = False
            break
        log_acc += enter_val - prev_val
        val = enter_val
        for _ in range(level.sweeps):
            cur, val = sweep(cur, level.density, ladder.slice, rng,
                             order="ascending", log_fx=val)
        path.append(cur.copy())
        prev_val = val  # log pi_i at xhat_i

    if ok:
        next_val = prev_val  # log pi_i at the state entering the level-i down move
        for j, level in enumerate(reversed(ladder.levels)):
            val = next_val
            for _ in range(level.sweeps):
                cur, val = sweep(cur, level.density, ladder.slice, rng,
                                 order="descending", log_fx=val)
            path.append(cur.copy())
            deeper = ladder.levels[n - 2 - j].density if j < n - 1 else ladder.base
            exit_val = float(deeper(cur))
            if not math.isfinite(exit_val) or not math.isfinite(val):
                ok = False
                break
            log_acc += exit_val - val
            next_val = exit_val

    if not ok:
        return TemperedResult(state=x.copy(), accepted=False, log_acc=-math.inf,
                              log_base=lp0, path=path, flag="non-finite")

    accepted = log_acc >= 0.0 or math.log(rng.random()) < log_acc
    if accepted:
        # exit_val from the last down move is log pi_0 at the proposal
        return TemperedResult(state=cur, accepted=True, log_acc=float(log_acc),
                              log_base=exit_val, path=path)
    return TemperedResult(state=x.copy(), accepted=False, log_acc=float(log_acc),
                          log_base=lp0, path=path)


@dataclass
class LevelDiagnostic:
    cost_units: float | None
    gap: float


@dataclass
class LadderReport:
    levels: list[LevelDiagnostic]
    warnings: list[str]


def ladder_validate(ladder: Ladder, data, theta_probe=None) -> LadderReport:
    """Sanity-check a ladder against a dataset.

    Reports, per level, the builder's per-evaluation cost estimate and the
    absolute log-density gap to the base at a probe point (default: the
    zero vector, the prior mean).  Warns when a deeper level is not cheaper
    than the one before it.
    """
    if data is None or getattr(data, "n", 0) < 1:
        raise ValueError("ladder validation needs a non-empty dataset")
    dim = getattr(ladder.base, "dim", None)
    if theta_probe is None:
        if dim is None:
            raise ValueError("pass theta_probe when the base density has no dim")
        theta_probe = np.zeros(dim)
    theta_probe = np.asarray(theta_probe, dtype=float)

    base_val = float(ladder.base(theta_probe))
    prev_cost = getattr(ladder.base, "cost_units", None)
    prev_name = "base"
    diags = []
    warnings = []
    for i, level in enumerate(ladder.levels, start=1):
        cost = getattr(level.density, "cost_units", None)
        gap = abs(float(level.density(theta_probe)) - base_val)
        diags.append(LevelDiagnostic(cost_units=cost, gap=gap))
        if cost is not None and prev_cost is not None and cost >= prev_cost:
            warnings.append(
                f"level {i} cost ({cost:.3g}) is not lower than {prev_name} "
                f"({prev_cost:.3g})")
        if cost is not None:
            prev_cost = cost
            prev_name = f"level {i}"
    return LadderReport(levels=diags, warnings=warnings)
