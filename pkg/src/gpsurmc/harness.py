"""Benchmark harness: synthetic data, experiment runs, method comparison.

Datasets are synthetic GP draws on uniform inputs in [0, 1]^p with eta = 5
and four length-scale profiles: short-iso (rho = 0.1), short-ard
(rho_k = 0.1 k), long-iso (rho = 2), long-ard (rho_k = 2 k).  Chains start
at the generating hyperparameters.  Every run records, per iteration, the
parameter vector, the data log likelihood, CPU time, and evaluation counts;
traces persist as CSV with a commented metadata header (the residual SD
sigma is always reported there).
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .approximations import SurrogateSpec, build_surrogate
from .diagnostics import ChainTrace, efficiency_report
from .exact import build_exact_posterior, cholesky_spd
from .mapchain import MapChainConfig, mapchain_transition
from .model import Dataset, Hyperparams, PriorSpec, kernel_matrix, sq_dists
from .slice_sampler import SliceConfig, sweep
from .tempered import Ladder, LadderLevel, tempered_transition

TRACE_MAGIC = "# gpsurmc-trace v1"
DATASET_MAGIC = "# gpsurmc-dataset v1"


@dataclass(frozen=True)
class DatasetSpec:
    """Synthetic dataset recipe.  sigma is the residual SD (default 0.1)."""

    n: int
    p: int = 1
    kernel: str = "iso"
    lengthscale: str = "short"
    eta: float = 5.0
    sigma: float = 0.1
    c: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if self.kernel not in ("iso", "ard"):
            raise ValueError("kernel must be 'iso' or 'ard'")
        if self.lengthscale not in ("short", "long"):
            raise ValueError("lengthscale must be 'short' or 'long'")
        if self.eta <= 0 or self.sigma < 0 or self.c < 0:
            raise ValueError("eta must be positive; sigma and c non-negative")

    def length_scales(self) -> np.ndarray:
        base = 0.1 if self.lengthscale == "short" else 2.0
        if self.kernel == "iso":
            return np.array([base])
        return base * np.arange(1, self.p + 1, dtype=float)

    def generating_theta(self) -> Hyperparams | None:
        """Hyperparams used to generate the data; None when sigma = 0
        (log sigma is then not representable)."""
        if self.sigma == 0:
            return None
        return Hyperparams(log_eta=math.log(self.eta),
                           log_sigma=math.log(self.sigma),
                           log_ls=np.log(self.length_scales()),
                           c=self.c)


def gen_synthetic(spec: DatasetSpec):
    """Draw (Dataset, generating Hyperparams or None) from the recipe.

    X is uniform on [0, 1]^p; y is a single draw from N(0, K + sigma^2 I)
    through the exact Cholesky path (jittered when sigma = 0 makes the
    matrix singular).
    """
    rng = np.random.default_rng(spec.seed)
    X = rng.random((spec.n, spec.p))
    kernel_theta = Hyperparams(log_eta=math.log(spec.eta), log_sigma=0.0,
                               log_ls=np.log(spec.length_scales()), c=spec.c)
    per_dim = spec.kernel == "ard" and spec.p > 1
    C = kernel_matrix(kernel_theta, sq_dists(X, per_dim=per_dim))
    C[np.diag_indices_from(C)] += spec.sigma ** 2
    fac = cholesky_spd(C)
    z = rng.standard_normal(spec.n)
    y = fac.upper.T @ z
    return Dataset(X, y), spec.generating_theta()


@dataclass(frozen=True)
class LadderLevelSpec:
    """One tempered rung: surrogate family, size, subset seed, sweeps."""

    method: str = "sod"
    m: int = 1
    seed: int = 0
    sweeps: int = 1


@dataclass(frozen=True)
class MethodSpec:
    """Which transition scheme to run and its tuning knobs."""

    name: str
    surrogate: SurrogateSpec | None = None
    r: int = 1
    s: int = 1
    ladder: tuple[LadderLevelSpec, ...] | None = None
    slice_w: float = 1.0
    slice_max_steps: int = 10

    def __post_init__(self):
        if self.name not in ("standard", "mapchain", "tempered"):
            raise ValueError("name must be 'standard', 'mapchain' or 'tempered'")
        if self.name == "mapchain" and self.surrogate is None:
            raise ValueError("mapchain needs a surrogate spec")
        if self.ladder is not None:
            object.__setattr__(self, "ladder", tuple(self.ladder))

    def m_label(self, n: int) -> str:
        if self.name == "mapchain":
            return str(self.surrogate.m)
        if self.name == "tempered":
            return ",".join(str(lv.m) for lv in self.resolved_ladder(n))
        return ""

    def resolved_ladder(self, n: int) -> tuple[LadderLevelSpec, ...]:
        """Explicit ladder, or the default two-level subset-of-data ladder
        with decreasing sizes (n/3, n/6)."""
        if self.ladder is not None:
            return self.ladder
        return (LadderLevelSpec(method="sod", m=max(1, n // 3)),
                LadderLevelSpec(method="sod", m=max(1, n // 6)))


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec
    method: MethodSpec
    iterations: int = 2000
    chain_seed: int = 1
    prior_mean: float = 0.0
    prior_sd: float = 3.0
    burn_in_fraction: float = 1.0 / 3.0
    output: str | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ValueError("burn_in_fraction must be in [0, 1)")


def _config_meta(config: RunConfig) -> dict:
    d = asdict(config)
    d["method"]["ladder"] = (None if config.method.ladder is None else
                             [asdict(lv) for lv in config.method.ladder])
    return d


def run_experiment(config: RunConfig):
    """Run one chain; returns (ChainTrace, summary dict).

    CPU time is measured around each transition only; dataset generation,
    evaluator construction and I/O are excluded.
    """
    spec = config.dataset
    if spec.sigma <= 0:
        raise ValueError("experiment runs need sigma > 0")
    data, theta_gen = gen_synthetic(spec)
    mode = spec.kernel
    dim = theta_gen.n_params
    prior = PriorSpec.default(dim, config.prior_mean, config.prior_sd)
    exact = build_exact_posterior(data, prior, c=spec.c, mode=mode)
    slice_cfg = SliceConfig(w=config.method.slice_w,
                            max_steps=config.method.slice_max_steps)
    rng = np.random.default_rng(config.chain_seed)
    x = theta_gen.to_vector()

    method = config.method
    surrogate = None
    ladder = None
    if method.name == "mapchain":
        surrogate = build_surrogate(data, prior, method.surrogate,
                                    c=spec.c, mode=mode)
        mcfg = MapChainConfig(r=method.r, s=method.s, slice=slice_cfg)
    elif method.name == "tempered":
        levels = []
        for lv in method.resolved_ladder(data.n):
            sspec = SurrogateSpec(method=lv.method, m=lv.m, seed=lv.seed)
            levels.append(LadderLevel(
                density=build_surrogate(data, prior, sspec, c=spec.c, mode=mode),
                sweeps=lv.sweeps))
        ladder = Ladder(base=exact, levels=levels, slice=slice_cfg)

    L = config.iterations
    theta_hist = np.empty((L, dim))
    log_lik = np.empty(L)
    cpu = np.empty(L)
    exact_evals = np.empty(L, dtype=int)
    sur_evals = np.empty(L, dtype=int)
    accepted = 0
    attempted = 0

    log_post = None   # exact log posterior at x, threaded between iterations
    log_sur = None
    for it in range(L):
        e0 = exact.counters.evals
        s0 = surrogate.counters.evals if surrogate is not None else 0
        if ladder is not None:
            s0 = sum(lv.density.counters.evals for lv in ladder.levels)
        t0 = time.process_time_ns()
        if method.name == "standard":
            x, log_post = sweep(x, exact, slice_cfg, rng, log_fx=log_post)
        elif method.name == "mapchain":
            res = mapchain_transition(x, mcfg, exact, surrogate, rng,
                                      log_exact_x=log_post, log_sur_x=log_sur)
            x, log_post, log_sur = res.state, res.log_exact, res.log_sur
            accepted += res.accepted
            attempted += res.attempted
        else:
            res = tempered_transition(x, ladder, rng, log_base_x=log_post)
            x, log_post = res.state, res.log_base
            accepted += int(res.accepted)
            attempted += 1
        t1 = time.process_time_ns()
        theta_hist[it] = x
        log_lik[it] = log_post - prior.log_density(x)
        cpu[it] = (t1 - t0) * 1e-9
        exact_evals[it] = exact.counters.evals - e0
        if surrogate is not None:
            sur_evals[it] = surrogate.counters.evals - s0
        elif ladder is not None:
            sur_evals[it] = sum(lv.density.counters.evals
                                for lv in ladder.levels) - s0
        else:
            sur_evals[it] = 0

    summary = {
        "method": method.name,
        "m_label": method.m_label(data.n),
        "iterations": L,
        "sigma": spec.sigma,
        "acceptance_rate": (accepted / attempted) if attempted else None,
        "total_cpu_seconds": float(cpu.sum()),
        "exact_evals": int(exact_evals.sum()),
        "surrogate_evals": int(sur_evals.sum()),
    }
    meta = {"method": method.name, "m_label": summary["m_label"],
            "sigma": spec.sigma, "config": _config_meta(config),
            "acceptance_rate": summary["acceptance_rate"]}
    trace = ChainTrace(theta=theta_hist, log_lik=log_lik, cpu_seconds=cpu,
                       exact_evals=exact_evals, surrogate_evals=sur_evals,
                       meta=meta)
    if config.output:
        write_trace(trace, config.output)
    return trace, summary


def compare_methods(configs):
    """Run several configs on one dataset spec; returns (report, traces).

    All configs must share an identical dataset spec (including its seed),
    so that differences are attributable to the methods alone.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("need at least one run config")
    ds = configs[0].dataset
    for c in configs[1:]:
        if c.dataset != ds:
            raise ValueError("compare_methods requires identical dataset specs")
    traces = []
    for c in configs:
        trace, _ = run_experiment(c)
        traces.append(trace)
    report = efficiency_report(traces,
                               burn_in_fraction=configs[0].burn_in_fraction)
    return report, traces


# ---------------------------------------------------------------------------
# persistence

def write_trace(trace: ChainTrace, path) -> None:
    """Trace CSV: commented metadata header, then one row per iteration."""
    d = trace.theta.shape[1]
    cols = (["iteration", "log_lik", "log_eta", "log_sigma"]
            + [f"log_ls_{j}" for j in range(d - 2)]
            + ["cpu_seconds", "exact_evals", "surrogate_evals"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(TRACE_MAGIC + "\n")
        fh.write("# meta: " + json.dumps(trace.meta, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(cols)
        for i in range(trace.n_iterations):
            row = ([str(i), repr(float(trace.log_lik[i]))]
                   + [repr(float(v)) for v in trace.theta[i]]
                   + [repr(float(trace.cpu_seconds[i])),
                      str(int(trace.exact_evals[i])),
                      str(int(trace.surrogate_evals[i]))])
            writer.writerow(row)


def read_trace(path) -> ChainTrace:
    meta = {}
    rows = []
    header = None
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                stripped = line[1:].strip()
                if stripped.startswith("meta:"):
                    meta = json.loads(stripped[len("meta:"):])
                continue
            reader = csv.reader([line])
            row = next(reader)
            if not row:
                continue
            if header is None:
                header = row
            else:
                rows.append(row)
    if header is None:
        raise ValueError(f"no header row in {path}")
    d = len(header) - 5
    if d < 1 or header[:2] != ["iteration", "log_lik"]:
        raise ValueError(f"unrecognized trace layout in {path}")
    theta = np.array([[float(v) for v in r[2:2 + d]] for r in rows])
    return ChainTrace(
        theta=theta,
        log_lik=np.array([float(r[1]) for r in rows]),
        cpu_seconds=np.array([float(r[2 + d]) for r in rows]),
        exact_evals=np.array([int(r[3 + d]) for r in rows]),
        surrogate_evals=np.array([int(r[4 + d]) for r in rows]),
        meta=meta)


def write_dataset(data: Dataset, path, meta: dict | None = None) -> None:
    """Dataset CSV: x columns then y, with a commented metadata header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(DATASET_MAGIC + "\n")
        if meta:
            fh.write("# meta: " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow([f"x{j}" for j in range(data.p)] + ["y"])
        for i in range(data.n):
            writer.writerow([repr(float(v)) for v in data.X[i]]
                            + [repr(float(data.y[i]))])


def read_dataset(path):
    """Returns (Dataset, meta dict)."""
    meta = {}
    rows = []
    header = None
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                stripped = line[1:].strip()
                if stripped.startswith("meta:"):
                    meta = json.loads(stripped[len("meta:"):])
                continue
            row = next(csv.reader([line]))
            if not row:
                continue
            if header is None:
                header = row
            else:
                rows.append([float(v) for v in row])
    if header is None or header[-1] != "y":
        raise ValueError(f"unrecognized dataset layout in {path}")
    arr = np.array(rows)
    return Dataset(arr[:, :-1], arr[:, -1]), meta


# ---------------------------------------------------------------------------
# config files

def method_spec_from_dict(d: dict) -> MethodSpec:
    d = dict(d)
    sur = d.pop("surrogate", None)
    if sur is not None:
        sur = SurrogateSpec(**sur)
    ladder = d.pop("ladder", None)
    if ladder is not None:
        ladder = tuple(LadderLevelSpec(**lv) for lv in ladder)
    sl = d.pop("slice", None)
    if sl:
        d.setdefault("slice_w", sl.get("w", 1.0))
        d.setdefault("slice_max_steps", sl.get("max_steps", 10))
    return MethodSpec(surrogate=sur, ladder=ladder, **d)


def run_config_from_dict(d: dict) -> RunConfig:
    d = dict(d)
    dataset = DatasetSpec(**d.pop("dataset"))
    method = method_spec_from_dict(d.pop("method"))
    prior = d.pop("prior", None)
    if prior:
        d.setdefault("prior_mean", prior.get("mean", 0.0))
        d.setdefault("prior_sd", prior.get("sd", 3.0))
    return RunConfig(dataset=dataset, method=method, **d)


def load_json_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
