"""Estimators and tests that turn simulated ensembles into verdicts."""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError, EstimationError

ALPHA = 0.01


@dataclass
class TestReport:
    """Outcome of one statistical or numerical check.

    ``kind`` is ``"p-value"`` (pass when ``value > threshold``) or
    ``"deviation"`` (pass when ``value <= threshold``; ``value`` is a
    deviation in standard errors or an absolute error).
    """

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    value: float
    threshold: float
    kind: str = "deviation"
    verdict: bool = field(init=False)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "p-value":
            self.verdict = bool(self.value > self.threshold)
        elif self.kind == "deviation":
            self.verdict = bool(self.value <= self.threshold)
        else:
            raise ValueError(f"unknown report kind {self.kind!r}")

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def empirical_abs_moment(samples, q: float):
    """Sample mean of ``|x|^q`` and its standard error."""
    x = np.abs(np.asarray(samples, dtype=float).ravel())
    if x.size < 30:
        raise ValueError("need at least 30 samples")
    if q < 0 and np.any(x == 0):
        raise DomainError("negative-order moment of samples containing zeros")
    if q == 0:
        return 1.0, 0.0
    y = x ** q
    return float(y.mean()), float(y.std(ddof=1) / np.sqrt(y.size))


@dataclass
class MomentScalingReport:
    """Fitted log-log slopes of ``E|X(t)|^q`` against ``t`` for several ``q``."""

    qs: np.ndarray
    slopes: np.ndarray
    ses: np.ndarray
    intercepts: np.ndarray
    times: np.ndarray
    reference: np.ndarray | None = None
    q_range: tuple = (-np.inf, np.inf)
    k_se: float = 3.0
    abs_tol: float = 0.0
    n_paths: int = 0

    @property
    def deviations(self) -> np.ndarray:
        return np.abs(self.slopes - self.reference)

    @property
    def tolerances(self) -> np.ndarray:
        return np.maximum(self.k_se * self.ses, self.abs_tol)

    @property
    def passed(self) -> np.ndarray:
        if self.reference is None:
            raise ValueError("no reference scaling function attached")
        return self.deviations <= self.tolerances

    def to_dict(self) -> dict:
        d = {"qs": self.qs, "slopes": self.slopes, "ses": self.ses,
             "intercepts": self.intercepts, "times": self.times,
             "q_range": list(self.q_range), "k_se": self.k_se, "abs_tol": self.abs_tol,
             "n_paths": self.n_paths}
        if self.reference is not None:
            d.update(reference=self.reference, passed=self.passed)
        return _jsonable(d)

    def rows(self):
        """``(q, slope, se, reference, passed)`` rows for a CSV summary."""
        for i, q in enumerate(self.qs):
            ref = None if self.reference is None else self.reference[i]
            ok = None if self.reference is None else bool(self.passed[i])
            yield q, self.slopes[i], self.ses[i], ref, ok


def fit_scaling_function(times, values, qs, reference=None, q_range=(-np.inf, np.inf),
                         k_se: float = 3.0, abs_tol: float = 0.0) -> MomentScalingReport:
    """Least-squares slope of ``log E|X(t)|^q`` on ``log t`` per ``q``.

    ``values`` is ``(n_paths, len(times))``. The slope standard error comes from
    the delta method applied to the empirical moments, carrying their
    covariance across time points (the columns share paths).

    ``reference`` is an array of theoretical slopes or a callable of ``q``.
    """
    t = np.asarray(times, dtype=float)
    vals = np.abs(np.asarray(values, dtype=float))
    qs = np.atleast_1d(np.asarray(qs, dtype=float))
    if np.any(qs <= q_range[0]) or np.any(qs >= q_range[1]):
        raise DomainError(f"q grid outside the valid range {q_range}")
    n = vals.shape[0]
    x_all = np.log(t)
    slopes, ses, icpts = [], [], []
    for q in qs:
        with np.errstate(divide="ignore"):
            pw = vals ** q
        m = pw.mean(axis=0)
        ok = np.isfinite(m) & (m > 0)
        if not np.all(ok):
            warnings.warn(f"q={q}: dropping {np.sum(~ok)} time points with unusable moments")
        if ok.sum() < 3:
            raise EstimationError(f"q={q}: fewer than 3 usable time points")
        x, mm, p = x_all[ok], m[ok], pw[:, ok]
        w = (x - x.mean()) / np.sum((x - x.mean()) ** 2)
        y = np.log(mm)
        slope = float(w @ y)
        slopes.append(slope)
        icpts.append(float(y.mean() - slope * x.mean()))
        grad = w / mm
        cov = np.atleast_2d(np.cov(p, rowvar=False)) / n
        ses.append(float(np.sqrt(max(grad @ cov @ grad, 0.0))))
    ref = None
    if reference is not None:
        ref = np.array([reference(q) for q in qs]) if callable(reference) \
            else np.asarray(reference, dtype=float)
    return MomentScalingReport(qs=qs, slopes=np.array(slopes), ses=np.array(ses),
                               intercepts=np.array(icpts), times=t, reference=ref,
                               q_range=tuple(q_range), k_se=k_se, abs_tol=abs_tol, n_paths=n)


def empirical_mellin(samples, theta: float, return_se: bool = False):
    """Empirical ``E[X^{i theta}]`` of a non-negative variable.

    Zeros contribute nothing, so the mean over positive samples is scaled by
    the positive-mass fraction. With ``return_se`` also returns the standard
    errors of the real and imaginary parts.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if np.any(x < 0):
        raise ValueError("Mellin transform needs non-negative samples")
    pos = x > 0
    if not np.any(pos):
        raise DomainError("no positive samples")
    z = np.zeros(x.size, dtype=complex)
    z[pos] = np.exp(1j * theta * np.log(x[pos]))
    val = complex(z.mean())
    if not return_se:
        return val
    se = (float(z.real.std(ddof=1) / np.sqrt(x.size)), float(z.imag.std(ddof=1) / np.sqrt(x.size)))
    return val, se


def ks_two_sample(x, y, name: str = "ks", alpha: float = ALPHA) -> TestReport:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size < 100 or y.size < 100:
        raise ValueError("KS test needs at least 100 points per sample")
    res = stats.ks_2samp(x, y, method="asymp")
    return TestReport(name=name, statistic=float(res.statistic), value=float(res.pvalue),
                      threshold=alpha, kind="p-value", details={"n_x": x.size, "n_y": y.size})


def empirical_cov(values, n_blocks: int = 100):
    """Entrywise sample covariance across paths and its block-jackknife SE.

    ``values`` is ``(n_paths, n_times)``. The jackknife deletes one of
    ``n_blocks`` contiguous groups of paths at a time.
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    g = min(n_blocks, n)
    cov = np.cov(v, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    bounds = np.linspace(0, n, g + 1).astype(int)
    s1 = v.sum(axis=0)
    s2 = v.T @ v
    reps = np.empty((g,) + cov.shape)
    for b in range(g):
        blk = v[bounds[b]:bounds[b + 1]]
        m = n - blk.shape[0]
        r1 = s1 - blk.sum(axis=0)
        r2 = s2 - blk.T @ blk
        reps[b] = (r2 - np.outer(r1, r1) / m) / (m - 1)
    se = np.sqrt((g - 1) / g * np.sum((reps - reps.mean(axis=0)) ** 2, axis=0))
    return cov, se
