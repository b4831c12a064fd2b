"""Univariate slice sampling with coordinate sweeps.

Each coordinate update draws a level under the log density, places an
interval of width w uniformly around the current point, steps the endpoints
out while they sit above the level (total expansion capped at max_steps
interval widths, split randomly between the two sides), then shrinks the
interval on rejected proposals until one lands above the level.  A full
ascending sweep updates coordinates 0..d-1 in order; a descending sweep is
its reversal (each single-coordinate update is reversible, so reversing the
composition order realizes the reverse transition structurally, with no
correction factors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class SliceConfig:
    """w: interval width per coordinate (scalar or per-coordinate array);
    max_steps: cap on the total number of stepping-out expansions."""

    w: float | np.ndarray = 1.0
    max_steps: int = 10

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("w must be positive and finite")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        self.w = float(w) if w.ndim == 0 else w

    def width(self, i: int) -> float:
        return self.w if isinstance(self.w, float) else float(self.w[i])


def slice_update_coord(x, i: int, logdens, cfg: SliceConfig, rng,
                       log_fx: float | None = None):
    """One slice update of coordinate i.  Returns (x_new, log_f_new).

    log_fx, when given, must equal logdens(x) and saves one evaluation.
    x is not modified.  The output point always lies within max_steps * w
    of the input coordinate.
    """
    x = np.asarray(x, dtype=float)
    if not 0 <= i < x.size:
        raise ValueError("coordinate index out of range")
    if log_fx is None:
        log_fx = logdens(x)
    if not math.isfinite(log_fx):
        raise ValueError("log density must be finite at the current point")

    w = cfg.width(i)
    x0 = float(x[i])
    log_y = log_fx + math.log(rng.random())

    left = x0 - w * rng.random()
    right = left + w
    j = int(cfg.max_steps * rng.random())
    k = (cfg.max_steps - 1) - j

    probe = x.copy()
    while j > 0:
        probe[i] = left
        if logdens(probe) <= log_y:
            break
        left -= w
        j -= 1
    while k > 0:
        probe[i] = right
        if logdens(probe) <= log_y:
            break
        right += w
        k -= 1

    while True:
        xi = left + rng.random() * (right - left)
        probe[i] = xi
        log_f = logdens(probe)
        if log_f > log_y:
            out = x.copy()
            out[i] = xi
            return out, float(log_f)
        if xi < x0:
            left = xi
        else:
            right = xi


def sweep(x, logdens, cfg: SliceConfig, rng, order: str = "ascending",
          log_fx: float | None = None):
    """Slice-update every coordinate once.  Returns (x_new, log_f_new).

    order 'ascending' visits coordinates 0..d-1; 'descending' visits them
    in reverse, realizing the reversal of the ascending sweep.
    """
    x = np.asarray(x, dtype=float)
    if order == "ascending":
        coords = range(x.size)
    elif order == "descending":
        coords = range(x.size - 1, -1, -1)
    else:
        raise ValueError("order must be 'ascending' or 'descending'")
    for i in coords:
        x, log_fx = slice_update_coord(x, i, logdens, cfg, rng, log_fx=log_fx)
    return x, float(log_fx)
