"""Command-line entry points: gen, run, compare, acf.

Each verb takes an optional JSON config file; individual flags override the
corresponding config fields.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import harness
from .diagnostics import act_estimate, efficiency_report, report_to_csv, report_to_text


def _dataset_spec(args, cfg: dict) -> harness.DatasetSpec:
    d = dict(cfg.get("dataset", {}))
    for name in ("n", "p", "kernel", "lengthscale", "eta", "sigma", "c", "seed"):
        val = getattr(args, name, None)
        if val is not None:
            d[name] = val
    if "n" not in d:
        raise SystemExit("dataset size n is required (flag --n or config)")
    return harness.DatasetSpec(**d)


def _method_spec(args, mdict: dict) -> harness.MethodSpec:
    m = dict(mdict)
    if getattr(args, "method", None):
        m["name"] = args.method
    if getattr(args, "m", None) is not None:
        sur = dict(m.get("surrogate") or {})
        sur["m"] = args.m
        sur.setdefault("method", getattr(args, "surrogate_method", None) or "sod")
        sur.setdefault("seed", 0)
        m["surrogate"] = sur
    elif getattr(args, "surrogate_method", None):
        sur = dict(m.get("surrogate") or {})
        sur["method"] = args.surrogate_method
        m["surrogate"] = sur
    for flag, key in (("r", "r"), ("s", "s"), ("slice_w", "slice_w"),
                      ("slice_max_steps", "slice_max_steps")):
        val = getattr(args, flag, None)
        if val is not None:
            m[key] = val
    if "name" not in m:
        m["name"] = "standard"
    return harness.method_spec_from_dict(m)


def _run_config(args) -> harness.RunConfig:
    cfg = harness.load_json_config(args.config) if args.config else {}
    spec = _dataset_spec(args, cfg)
    method = _method_spec(args, cfg.get("method", {}))
    kw = {}
    for name in ("iterations", "chain_seed", "burn_in_fraction"):
        if name in cfg:
            kw[name] = cfg[name]
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    prior = cfg.get("prior", {})
    kw["prior_mean"] = prior.get("mean", 0.0)
    kw["prior_sd"] = prior.get("sd", 3.0)
    out = getattr(args, "out", None) or cfg.get("output")
    return harness.RunConfig(dataset=spec, method=method, output=out, **kw)


def cmd_gen(args) -> int:
    cfg = harness.load_json_config(args.config) if args.config else {}
    spec = _dataset_spec(args, cfg)
    data, theta = harness.gen_synthetic(spec)
    meta = dataclasses.asdict(spec)
    meta["theta_gen"] = None if theta is None else list(theta.to_vector())
    out = args.out or cfg.get("output") or "dataset.csv"
    harness.write_dataset(data, out, meta=meta)
    print(f"wrote {data.n} x {data.p} dataset (sigma={spec.sigma}) to {out}")
    return 0


def cmd_run(args) -> int:
    config = _run_config(args)
    if config.output is None:
        config = dataclasses.replace(config, output="trace.csv")
    trace, summary = harness.run_experiment(config)
    start = int(np.floor(trace.n_iterations * config.burn_in_fraction))
    tau, k = act_estimate(trace.log_lik[start:])
    print(f"method={summary['method']} m=[{summary['m_label']}] "
          f"iterations={summary['iterations']} sigma={summary['sigma']}")
    if summary["acceptance_rate"] is not None:
        print(f"acceptance_rate={summary['acceptance_rate']:.4f}")
    print(f"tau_hat(log_lik)={tau:.2f} (cutoff lag {k}), "
          f"cpu_total={summary['total_cpu_seconds']:.3f}s, "
          f"exact_evals={summary['exact_evals']}, "
          f"surrogate_evals={summary['surrogate_evals']}")
    print(f"trace written to {config.output}")
    return 0


def cmd_compare(args) -> int:
    cfg = harness.load_json_config(args.config)
    if "methods" not in cfg or not cfg["methods"]:
        raise SystemExit("compare config must list methods")
    base = {k: v for k, v in cfg.items()
            if k in ("iterations", "chain_seed", "burn_in_fraction", "prior")}
    configs = []
    out_dir = args.out_dir or cfg.get("output_dir")
    for i, mdict in enumerate(cfg["methods"]):
        d = {"dataset": cfg["dataset"], "method": mdict, **base}
        rc = harness.run_config_from_dict(d)
        if out_dir:
            name = mdict.get("name", f"method{i}")
            rc = dataclasses.replace(rc, output=f"{out_dir}/trace_{i}_{name}.csv")
        configs.append(rc)
    report, traces = harness.compare_methods(configs)
    if out_dir:
        for rc, tr in zip(configs, traces):
            harness.write_trace(tr, rc.output)
    print(report_to_text(report))
    report_path = args.report or cfg.get("report")
    if report_path:
        report_to_csv(report, report_path)
        print(f"report written to {report_path}")
    return 0


def cmd_acf(args) -> int:
    trace = harness.read_trace(args.trace)
    start = int(np.floor(trace.n_iterations * args.burn_in))
    if args.column == "log_lik":
        series = trace.log_lik[start:]
    else:
        d = trace.theta.shape[1]
        names = ["log_eta", "log_sigma"] + [f"log_ls_{j}" for j in range(d - 2)]
        if args.column not in names:
            raise SystemExit(f"unknown column {args.column!r}; "
                             f"choose from log_lik, {', '.join(names)}")
        series = trace.theta[start:, names.index(args.column)]
    tau, k = act_estimate(series)
    print(f"series={args.column} length={series.size} "
          f"(burn-in fraction {args.burn_in})")
    print(f"tau_hat={tau:.3f} cutoff_lag={k}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpsurmc",
        description="Surrogate-accelerated MCMC for GP regression "
                    "hyperparameters: dataset generation, chain runs, "
                    "method comparison, autocorrelation diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_dataset_flags(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--n", type=int)
        p.add_argument("--p", type=int)
        p.add_argument("--kernel", choices=["iso", "ard"])
        p.add_argument("--lengthscale", choices=["short", "long"])
        p.add_argument("--eta", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--seed", type=int)

    g = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    add_dataset_flags(g)
    g.add_argument("--out", help="output CSV path (default dataset.csv)")
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("run", help="run one chain and write its trace")
    add_dataset_flags(r)
    r.add_argument("--method", choices=["standard", "mapchain", "tempered"])
    r.add_argument("--m", type=int, help="surrogate size for mapchain")
    r.add_argument("--surrogate-method", dest="surrogate_method",
                   choices=["sod", "eigen", "nystrom"])
    r.add_argument("--r", type=int, help="mark-move attempts per transition")
    r.add_argument("--s", type=int, help="mark proposal stride")
    r.add_argument("--slice-w", dest="slice_w", type=float)
    r.add_argument("--slice-max-steps", dest="slice_max_steps", type=int)
    r.add_argument("--iterations", type=int)
    r.add_argument("--chain-seed", dest="chain_seed", type=int)
    r.add_argument("--burn-in-fraction", dest="burn_in_fraction", type=float)
    r.add_argument("--out", help="trace CSV path (default trace.csv)")
    r.set_defaults(fn=cmd_run)

    c = sub.add_parser("compare", help="run several methods on one dataset "
                                       "and print the efficiency table")
    c.add_argument("--config", required=True, help="JSON config with a "
                   "dataset and a methods list")
    c.add_argument("--report", help="write the table to this CSV")
    c.add_argument("--out-dir", dest="out_dir", help="directory for traces")
    c.set_defaults(fn=cmd_compare)

    a = sub.add_parser("acf", help="autocorrelation time of a trace column")
    a.add_argument("--trace", required=True)
    a.add_argument("--column", default="log_lik")
    a.add_argument("--burn-in", dest="burn_in", type=float, default=1.0 / 3.0)
    a.set_defaults(fn=cmd_acf)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
