"""Command-line experiment runner.

    lmfractal simulate-lmf      --config exp.yaml   -> paths.csv
    lmfractal simulate-cascade  --config exp.yaml   -> cascade.csv
    lmfractal moments           --config exp.yaml   -> moments.json, moments.csv
    lmfractal verify SUITE      [--config exp.yaml] -> verify-SUITE.json
    lmfractal report            [FILES...]          -> summary.json, summary.csv

Exit status: 0 when every selected verdict passes, 1 when some fail (their
names go to stderr), 2 for an invalid configuration.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cascade import cell_edges, simulate_lognormal_cascade
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .io import read_json, write_csv, write_json
from .lmf import sample_lmf, valid_moment_range
from .analysis import fit_scaling_function
from .rng import run_chunked
from .suites import SUITES, run_suite, suite_parameters

OUT_ENV = "LMFRACTAL_OUT"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _out_dir(args, cfg: ExperimentConfig | None) -> Path:
    out = args.out or (cfg.out if cfg else None) or os.environ.get(OUT_ENV) or "results"
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _config(args, required: bool) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    elif required:
        raise ConfigError(f"{args.command} needs --config")
    else:
        cfg = parse_config("seed: 0\n", source="<default>")
    if args.seed is not None:
        cfg.with_seed(args.seed)
    return cfg


def _require(cfg, attr, section):
    if getattr(cfg, attr) is None:
        raise ConfigError(f"this subcommand needs a '{section}' section", None,
                          getattr(cfg, "source", None))
    return getattr(cfg, attr)


def _provenance(cfg: ExperimentConfig) -> dict:
    return {"seed": cfg.seed, "chunk_size": cfg.chunk_size, "config": cfg.raw}


def cmd_simulate_lmf(args, cfg):
    model, times = _require(cfg, "model", "model"), _require(cfg, "times", "times")
    vals = run_chunked(lambda rng, m: sample_lmf(model, times, rng, m).path.values, cfg.paths,
                       cfg.seed, "simulate-lmf", cfg.chunk_size, args.workers)
    out = _out_dir(args, cfg) / "paths.csv"
    write_csv(out, ["path_id", "t", "X"],
              ((p, t, x) for p, row in enumerate(vals) for t, x in zip(times, row)))
    print(out)
    return EXIT_OK


def cmd_simulate_cascade(args, cfg):
    spec = _require(cfg, "cascade", "cascade")
    q = run_chunked(lambda rng, m: simulate_lognormal_cascade(spec, rng, m), cfg.paths,
                    cfg.seed, "simulate-cascade", cfg.chunk_size, args.workers)
    t = cell_edges(spec)
    out = _out_dir(args, cfg) / "cascade.csv"
    write_csv(out, ["replica_id", "t", "Q"],
              ((r, ti, qi) for r, row in enumerate(q) for ti, qi in zip(t, row)))
    print(out)
    return EXIT_OK


def cmd_moments(args, cfg):
    model, times = _require(cfg, "model", "model"), _require(cfg, "times", "times")
    lo, hi = valid_moment_range(model, two_sided=bool(times[-1] > model.time_scale))
    bad = [q for q in cfg.qs if not lo < q < hi]
    if bad:
        raise ConfigError(f"moments.q values {bad} lie outside the valid range ({lo}, {hi})")
    vals = run_chunked(lambda rng, m: sample_lmf(model, times, rng, m).path.values, cfg.paths,
                       cfg.seed, "moments", cfg.chunk_size, args.workers)

    def reference(q):
        return -model.levy.laplace_exponent(q)

    rep = fit_scaling_function(times / model.time_scale, vals, cfg.qs, reference=reference,
                               q_range=(lo, hi), k_se=cfg.k_se, abs_tol=cfg.abs_tol)
    out = _out_dir(args, cfg)
    passed = bool(np.all(rep.passed))
    write_json(out / "moments.json", {**_provenance(cfg), "model": model.to_dict(),
                                      "report": rep.to_dict(), "passed": passed})
    write_csv(out / "moments.csv", ["q", "tau_hat", "se", "reference", "passed"], rep.rows())
    print(out / "moments.json")
    if not passed:
        print("failing: " + ", ".join(f"moments/q={q}" for q, *_, ok in rep.rows() if not ok),
              file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_verify(args, cfg):
    suite = args.suite or cfg.suite
    unknown = set(cfg.suite_options) - suite_parameters(suite)
    if unknown:
        raise ConfigError(f"suite_options {sorted(unknown)} not accepted by suite {suite!r}; "
                          f"expected a subset of {sorted(suite_parameters(suite))}")
    reports = run_suite(suite, cfg.seed, args.workers, cfg.chunk_size, **cfg.suite_options)
    failing = [r.name for r in reports if not r.verdict]
    path = _out_dir(args, cfg) / f"verify-{suite}.json"
    write_json(path, {**_provenance(cfg), "suite": suite, "suite_options": cfg.suite_options,
                      "reports": [r.to_dict() for r in reports], "passed": not failing,
                      "failing": failing})
    print(path)
    for r in reports:
        print(f"{'PASS' if r.verdict else 'FAIL'}  {r.name}  value={r.value:.6g} "
              f"threshold={r.threshold:.6g}")
    if failing:
        print("failing: " + ", ".join(failing), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_report(args, cfg):
    out = _out_dir(args, None)
    files = [Path(f) for f in args.files] or sorted(
        p for p in out.glob("*.json") if p.name != "summary.json")
    rows, sources, failing = [], [], []
    for f in files:
        data = read_json(f)
        sources.append({"file": f.name, "seed": data.get("seed"), "passed": data.get("passed")})
        for r in data.get("reports", []):
            rows.append((f.name, r["name"], r["kind"], r["value"], r["threshold"], r["verdict"]))
            if not r["verdict"]:
                failing.append(r["name"])
        if "reports" not in data and data.get("passed") is False:
            failing.append(f.name)
    write_json(out / "summary.json", {"sources": sources, "n_reports": len(rows),
                                      "failing": failing, "passed": not failing})
    write_csv(out / "summary.csv", ["source", "name", "kind", "value", "threshold", "verdict"],
              rows)
    print(out / "summary.json")
    if failing:
        print("failing: " + ", ".join(failing), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


COMMANDS = {
    "simulate-lmf": (cmd_simulate_lmf, True),
    "simulate-cascade": (cmd_simulate_cascade, True),
    "moments": (cmd_moments, True),
    "verify": (cmd_verify, False),
    "report": (cmd_report, False),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment file")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--workers", type=int, default=1, help="worker threads (default 1)")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./results)")
    p = argparse.ArgumentParser(prog="lmfractal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "verify":
            sp.add_argument("suite", nargs="?", choices=[*SUITES, "all"])
        if name == "report":
            sp.add_argument("files", nargs="*", help="JSON reports (default: all in --out)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    fn, needs_config = COMMANDS[args.command]
    try:
        cfg = None if args.command == "report" else _config(args, needs_config)
        return fn(args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
