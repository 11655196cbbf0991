"""Experiment configuration files (YAML).

Schema (all sections optional except ``seed``)::

    seed: 42                    # master seed, non-negative integer
    model:
      preset: {name: mbm-analog, sigma: 0.5, T: 1.0}
      # or an explicit pair:
      levy: {kind: brownian, drift: -0.75, volatility: 0.5}
      stationary: {kind: ou, rate: 0.375, variance: 1.0}
      horizon: 0.0
      time_scale: 1.0
    cascade: {T: 1.0, l: 0.00390625, variance: 0.2, n: 512}
    times:
      dyadic: {min_exponent: -8, max_exponent: 0}
      # or values: [0.25, 0.5, 1.0]
      # or linear: {start: 0.1, stop: 1.0, num: 10}
    ensemble: {paths: 10000, chunk_size: 4096}
    moments: {q: [0.5, 1, 2, 3], k_se: 3.0, abs_tol: 0.05}
    suite: all
    suite_options: {n_stat: 2000}
    out: results

Errors carry the line of the offending entry.
"""
from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import levy as levy_mod
from . import stationary as stat_mod
from .cascade import CascadeSpec
from .lmf import LmfModel, mbm_analog_preset
from .rng import DEFAULT_CHUNK_SIZE
from .suites import SUITES

TOP_KEYS = {"seed", "model", "cascade", "times", "ensemble", "moments", "suite",
            "suite_options", "out"}
PRESETS = ("mbm-analog", "self-similar")


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based or ``None``."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = source or "config"
        prefix = f"{where}:{line}: " if line is not None else f"{where}: "
        super().__init__(prefix + message)


@dataclass
class ExperimentConfig:
    seed: int
    model: LmfModel | None = None
    cascade: CascadeSpec | None = None
    times: np.ndarray | None = None
    paths: int = 1000
    chunk_size: int = DEFAULT_CHUNK_SIZE
    qs: tuple = (0.5, 1.0, 2.0, 3.0)
    k_se: float = 3.0
    abs_tol: float = 0.0
    suite: str = "all"
    suite_options: dict = field(default_factory=dict)
    out: str | None = None
    raw: dict = field(default_factory=dict)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        self.seed = _check_seed(seed, None, None)
        self.raw = dict(self.raw, seed=self.seed)
        return self


def _line_map(node, path=(), out=None):
    """``{key path: 1-based line}`` for every node of a composed YAML document."""
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = path + (k.value,)
            out[key] = k.start_mark.line + 1
            _line_map(v, key, out)
            out[key] = k.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, path + (i,), out)
    return out


class _Ctx:
    def __init__(self, lines, source):
        self.lines = lines
        self.source = source

    def err(self, path, msg):
        line = None
        p = tuple(path)
        while line is None and p is not None:
            line = self.lines.get(p)
            p = p[:-1] if p else None
        return ConfigError(msg, line, self.source)

    def number(self, d, path, key, default=None, positive=False, nonneg=False):
        if key not in d:
            if default is None:
                raise self.err(path, f"missing required field {key!r}")
            return default
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise self.err(path + (key,), f"{key!r} must be a finite number, got {v!r}")
        if positive and v <= 0:
            raise self.err(path + (key,), f"{key!r} must be positive, got {v!r}")
        if nonneg and v < 0:
            raise self.err(path + (key,), f"{key!r} must be non-negative, got {v!r}")
        return float(v)

    def integer(self, d, path, key, default=None, minimum=None):
        if key not in d:
            if default is None:
                raise self.err(path, f"missing required field {key!r}")
            return default
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, int):
            raise self.err(path + (key,), f"{key!r} must be an integer, got {v!r}")
        if minimum is not None and v < minimum:
            raise self.err(path + (key,), f"{key!r} must be >= {minimum}, got {v}")
        return v

    def mapping(self, d, path, key):
        v = d.get(key, {})
        if not isinstance(v, dict):
            raise self.err(path + (key,), f"{key!r} must be a mapping")
        return v


def _check_seed(v, ctx, path):
    if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < 2 ** 64:
        msg = f"seed must be an integer in [0, 2**64), got {v!r}"
        if ctx is None:
            raise ConfigError(msg)
        raise ctx.err(path, msg)
    return int(v)


def _build_component(ctx, spec, path, module, label):
    if not isinstance(spec, dict):
        raise ctx.err(path, f"{label} must be a mapping with a 'kind' field")
    kind = spec.get("kind")
    if kind not in module.KINDS:
        raise ctx.err(path + (("kind",) if "kind" in spec else ()),
                      f"unknown {label} kind {kind!r}; expected one of {sorted(module.KINDS)}")
    cls = module.KINDS[kind]
    params = {k: v for k, v in spec.items() if k != "kind"}
    allowed = set(inspect.signature(cls).parameters)
    for k, v in params.items():
        if k not in allowed:
            raise ctx.err(path + (k,), f"unknown {label} parameter {k!r} for kind {kind!r}; "
                                       f"expected {sorted(allowed)}")
        ctx.number(params, path, k)
    try:
        return cls(**params)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ctx.err(path, f"invalid {label}: {exc}") from None


def _build_model(ctx, m, path):
    if "preset" in m:
        for k in ("levy", "stationary"):
            if k in m:
                raise ctx.err(path + (k,),
                              "give either a preset or an explicit levy/stationary pair")
        p = m["preset"]
        pp = path + ("preset",)
        if isinstance(p, str):
            p = {"name": p}
        if not isinstance(p, dict) or p.get("name") not in PRESETS:
            raise ctx.err(pp, f"preset name must be one of {list(PRESETS)}")
        try:
            if p["name"] == "mbm-analog":
                model = mbm_analog_preset(ctx.number(p, pp, "sigma", 0.5),
                                          ctx.number(p, pp, "T", 1.0, positive=True))
            else:
                model = LmfModel(levy_mod.DeterministicDrift(ctx.number(p, pp, "hurst", 0.3)),
                                 stat_mod.OrnsteinUhlenbeck(ctx.number(p, pp, "rate", 1.0,
                                                                       positive=True)),
                                 time_scale=ctx.number(p, pp, "T", 1.0, positive=True))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ctx.err(pp, str(exc)) from None
        if "horizon" in m:
            model = model.with_horizon(ctx.number(m, path, "horizon", nonneg=True))
        return model
    if "levy" not in m or "stationary" not in m:
        raise ctx.err(path, "model needs a 'preset' or both 'levy' and 'stationary'")
    lv = _build_component(ctx, m["levy"], path + ("levy",), levy_mod, "levy")
    st = _build_component(ctx, m["stationary"], path + ("stationary",), stat_mod, "stationary")
    return LmfModel(lv, st, horizon=ctx.number(m, path, "horizon", 0.0, nonneg=True),
                    time_scale=ctx.number(m, path, "time_scale", 1.0, positive=True))


def _build_times(ctx, t, path):
    forms = [k for k in ("dyadic", "values", "linear") if k in t]
    if len(forms) != 1:
        raise ctx.err(path, "times needs exactly one of 'dyadic', 'values', 'linear'")
    form = forms[0]
    fp = path + (form,)
    if form == "values":
        vals = t["values"]
        if not isinstance(vals, list) or not vals:
            raise ctx.err(fp, "times.values must be a non-empty list")
        for i, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ctx.err(fp + (i,), f"time {v!r} is not a number")
        grid = np.asarray(vals, dtype=float)
    elif form == "dyadic":
        d = ctx.mapping(t, path, "dyadic")
        lo = ctx.integer(d, fp, "min_exponent", -8)
        hi = ctx.integer(d, fp, "max_exponent", 0)
        if hi < lo:
            raise ctx.err(fp, "max_exponent must be >= min_exponent")
        grid = 2.0 ** np.arange(lo, hi + 1)
    else:
        d = ctx.mapping(t, path, "linear")
        grid = np.linspace(ctx.number(d, fp, "start", positive=True),
                           ctx.number(d, fp, "stop", positive=True),
                           ctx.integer(d, fp, "num", minimum=1))
    if np.any(grid <= 0) or (grid.size > 1 and np.any(np.diff(grid) <= 0)):
        raise ctx.err(fp, "times must be positive and strictly increasing")
    return grid


def parse_config(text: str, source: str | None = None) -> ExperimentConfig:
    """Parse and validate YAML text."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          None if mark is None else mark.line + 1, source) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", 1, source)
    ctx = _Ctx(_line_map(node), source)
    for k in data:
        if k not in TOP_KEYS:
            raise ctx.err((k,), f"unknown section {k!r}; expected one of {sorted(TOP_KEYS)}")
    if "seed" not in data:
        raise ctx.err((), "missing required field 'seed'")
    cfg = ExperimentConfig(seed=_check_seed(data["seed"], ctx, ("seed",)), raw=data)

    if "model" in data:
        cfg.model = _build_model(ctx, ctx.mapping(data, (), "model"), ("model",))
    if "cascade" in data:
        c = ctx.mapping(data, (), "cascade")
        for k in c:
            if k not in ("T", "l", "variance", "n"):
                raise ctx.err(("cascade", k), f"unknown cascade field {k!r}")
        try:
            cfg.cascade = CascadeSpec(T=ctx.number(c, ("cascade",), "T", 1.0, positive=True),
                                      l=ctx.number(c, ("cascade",), "l", 1 / 256, positive=True),
                                      variance=ctx.number(c, ("cascade",), "variance", 0.2,
                                                          nonneg=True),
                                      n=ctx.integer(c, ("cascade",), "n", 512, minimum=2))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ctx.err(("cascade",), str(exc)) from None
    if "times" in data:
        cfg.times = _build_times(ctx, ctx.mapping(data, (), "times"), ("times",))
        top = cfg.model.time_set[1] * (1 + 1e-12) if cfg.model is not None else math.inf
        if cfg.times[-1] > top:
            t = data["times"]
            where = ("times", "values", int(np.argmax(cfg.times > top))) if "values" in t \
                else ("times", next(k for k in ("dyadic", "linear") if k in t))
            raise ctx.err(where, f"times exceed the model time set (0, "
                                 f"{cfg.model.time_set[1]:.6g}]; raise model.horizon")
    e = ctx.mapping(data, (), "ensemble")
    cfg.paths = ctx.integer(e, ("ensemble",), "paths", 1000, minimum=1)
    cfg.chunk_size = ctx.integer(e, ("ensemble",), "chunk_size", DEFAULT_CHUNK_SIZE, minimum=1)
    mo = ctx.mapping(data, (), "moments")
    if "q" in mo:
        qs = mo["q"]
        if not isinstance(qs, list) or not qs:
            raise ctx.err(("moments", "q"), "moments.q must be a non-empty list")
        for i, q in enumerate(qs):
            if isinstance(q, bool) or not isinstance(q, (int, float)):
                raise ctx.err(("moments", "q", i), f"q value {q!r} is not a number")
        cfg.qs = tuple(float(q) for q in qs)
    cfg.k_se = ctx.number(mo, ("moments",), "k_se", 3.0, positive=True)
    cfg.abs_tol = ctx.number(mo, ("moments",), "abs_tol", 0.0, nonneg=True)
    if "suite" in data:
        if data["suite"] not in (*SUITES, "all"):
            raise ctx.err(("suite",), f"unknown suite {data['suite']!r}; expected one of "
                                      f"{sorted(SUITES) + ['all']}")
        cfg.suite = data["suite"]
    cfg.suite_options = dict(ctx.mapping(data, (), "suite_options"))
    for k, v in cfg.suite_options.items():
        ctx.integer(cfg.suite_options, ("suite_options",), k, minimum=1)
    if "out" in data:
        if not isinstance(data["out"], str):
            raise ctx.err(("out",), "out must be a path string")
        cfg.out = data["out"]
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, source=str(path))
