"""Mapping the sampled state to a marked surrogate chain.

One transition of the exact chain works in three steps: the current point x
becomes state 0 of a fresh auxiliary chain whose dynamics leave the
surrogate density invariant; the mark (which state counts as "current") is
moved along the chain by Metropolis steps whose acceptance ratio only
involves the exact/surrogate density ratio at the two endpoints; finally the
state under the mark is returned as the next point of the exact chain.

The auxiliary chain is conceptually unbounded in both directions and is
simulated lazily: a state is generated only when a mark proposal first needs
it, forward states by ascending slice sweeps and backward states by
descending sweeps (the reversal).  Each state caches its surrogate log
density when it is created and its exact log density the first time a mark
proposal lands on it, so the exact posterior is evaluated at most once per
chain index no matter how often the mark revisits it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .slice_sampler import SliceConfig, sweep


@dataclass
class MapChainConfig:
    """r: mark-move attempts per transition; s: proposal stride (the mark
    proposes index +- s with equal probability); slice: sweep configuration
    of the surrogate-invariant dynamics."""

    r: int = 1
    s: int = 1
    slice: SliceConfig = field(default_factory=SliceConfig)

    def __post_init__(self):
        if self.r < 1 or self.s < 1:
            raise ValueError("r and s must be at least 1")


@dataclass
class ChainState:
    x: np.ndarray
    log_sur: float
    log_exact: float | None = None


class MarkedChain:
    """Lazily simulated bidirectional chain with a marked index."""

    def __init__(self, x: np.ndarray, log_sur: float, log_exact: float):
        self._states: dict[int, ChainState] = {
            0: ChainState(np.array(x, dtype=float), float(log_sur), float(log_exact))}
        self.mark = 0
        self.lo = 0
        self.hi = 0
        self.exact_cache_hits = 0
        self.accepted_moves = 0
        self.attempted_moves = 0

    @property
    def indices(self) -> list[int]:
        return sorted(self._states)

    def state(self, idx: int) -> np.ndarray:
        return self._states[idx].x

    def log_sur(self, idx: int) -> float:
        return self._states[idx].log_sur

    def extend_to(self, idx: int, surrogate, cfg: SliceConfig, rng) -> None:
        """Simulate any missing states between the frontier and idx.

        Forward states come from ascending sweeps of the surrogate dynamics,
        backward states from descending sweeps; already-present indices cost
        nothing.
        """
        while self.hi < idx:
            src = self._states[self.hi]
            x, log_sur = sweep(src.x, surrogate, cfg, rng,
                               order="ascending", log_fx=src.log_sur)
            self.hi += 1
            self._states[self.hi] = ChainState(x, log_sur)
        while self.lo > idx:
            src = self._states[self.lo]
            x, log_sur = sweep(src.x, surrogate, cfg, rng,
                               order="descending", log_fx=src.log_sur)
            self.lo -= 1
            self._states[self.lo] = ChainState(x, log_sur)

    def log_exact(self, idx: int, exact) -> float:
        """Exact log density at a stored state, evaluated at most once."""
        st = self._states[idx]
        if st.log_exact is None:
            st.log_exact = float(exact(st.x))
        else:
            self.exact_cache_hits += 1
        return st.log_exact


def map_to_chain(x, exact, surrogate, rng=None, log_exact_x: float | None = None,
                 log_sur_x: float | None = None) -> MarkedChain:
    """Start a fresh marked chain at x (index 0, both densities cached).

    Cached values from the previous transition can be passed in so that
    mapping costs no new evaluations.
    """
    x = np.asarray(x, dtype=float)
    ls = float(surrogate(x)) if log_sur_x is None else float(log_sur_x)
    le = float(exact(x)) if log_exact_x is None else float(log_exact_x)
    if not (math.isfinite(ls) and math.isfinite(le)):
        raise ValueError("exact and surrogate log densities must be finite at x")
    return MarkedChain(x, ls, le)


def mark_log_ratio(chain: MarkedChain, idx: int, exact) -> float:
    """Log acceptance ratio for moving the mark to an existing index:
    [log pi - log pi*](proposal) - [log pi - log pi*](current mark)."""
    new = chain.log_exact(idx, exact) - chain.log_sur(idx)
    cur = chain.log_exact(chain.mark, exact) - chain.log_sur(chain.mark)
    return new - cur


def move_mark(chain: MarkedChain, cfg: MapChainConfig, exact, surrogate,
              rng) -> MarkedChain:
    """One Metropolis attempt at moving the mark by +- s.

    The proposal direction is an even coin; missing states are simulated on
    demand.  A log ratio of exactly 0 accepts outright.
    """
    step = cfg.s if rng.random() < 0.5 else -cfg.s
    target = chain.mark + step
    chain.extend_to(target, surrogate, cfg.slice, rng)
    log_acc = mark_log_ratio(chain, target, exact)
    chain.attempted_moves += 1
    if log_acc >= 0.0 or math.log(rng.random()) < log_acc:
        chain.mark = target
        chain.accepted_moves += 1
    return chain


@dataclass
class MapChainResult:
    """Outcome of one exact-chain transition through the auxiliary chain.

    state is the point under the final mark; log_exact/log_sur are its
    cached densities (reusable for the next transition); marked_visits
    records the marked state after each of the r move attempts."""

    state: np.ndarray
    log_exact: float
    log_sur: float
    marked_visits: list[np.ndarray]
    accepted: int
    attempted: int


def mapchain_transition(x, cfg: MapChainConfig, exact, surrogate, rng,
                        log_exact_x: float | None = None,
                        log_sur_x: float | None = None) -> MapChainResult:
    """One full transition: map to a fresh chain, move the mark r times,
    return the marked state.  The auxiliary chain is discarded afterwards."""
    chain = map_to_chain(x, exact, surrogate, rng,
                         log_exact_x=log_exact_x, log_sur_x=log_sur_x)
    visits = []
    for _ in range(cfg.r):
        move_mark(chain, cfg, exact, surrogate, rng)
        visits.append(chain.state(chain.mark).copy())
    final = chain._states[chain.mark]
    return MapChainResult(state=final.x.copy(),
                          log_exact=chain.log_exact(chain.mark, exact),
                          log_sur=final.log_sur,
                          marked_visits=visits,
                          accepted=chain.accepted_moves,
                          attempted=chain.attempted_moves)
