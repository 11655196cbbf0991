"""L-multifractal processes from a (Lévy, stationary) pair.

With horizon ``a`` and time scale ``T`` the process is

    X(t) = exp(L(a - log u) - L(a)) * Y(log u),   u = t / T in (0, e^a],

where ``L`` and ``Y`` are independent. ``DeterministicDrift(H)`` gives the
classical Lamperti transform ``X(t) = u^H Y(log u)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .levy import BrownianWithDrift, LevyModel
from .stationary import OrnsteinUhlenbeck, StationaryModel


@dataclass(frozen=True)
class LmfModel:
    levy: LevyModel
    stationary: StationaryModel
    horizon: float = 0.0
    time_scale: float = 1.0
    # set when the stationary covariance is the one yielding second-order stationary increments
    matched: bool = False

    def __post_init__(self):
        if self.horizon < 0:
            raise DomainError("horizon must be non-negative")
        if self.time_scale <= 0:
            raise DomainError("time_scale must be positive")

    @property
    def time_set(self) -> tuple[float, float]:
        """``T`` as the interval ``(0, T e^a]``."""
        return (0.0, self.time_scale * math.exp(self.horizon))

    @property
    def scaling_time_set(self) -> tuple[float, float]:
        """``S = (0, T min(1, e^a)]`` where factors are independent of the process."""
        return (0.0, self.time_scale * min(1.0, math.exp(self.horizon)))

    def with_horizon(self, a: float) -> "LmfModel":
        return replace(self, horizon=float(a))

    def to_dict(self) -> dict:
        return {"levy": self.levy.to_dict(), "stationary": self.stationary.to_dict(),
                "horizon": self.horizon, "time_scale": self.time_scale,
                "matched": self.matched}


@dataclass
class SamplePath:
    """Values of one or more paths on a shared, strictly increasing time grid.

    ``values`` has shape ``(n_times,)`` or ``(n_paths, n_times)``.
    """

    times: np.ndarray
    values: np.ndarray
    seed: int | None = None
    model: LmfModel | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values)
        if self.times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if self.values.shape[-1] != self.times.size:
            raise ValueError("values and times lengths differ")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def write_csv(self, path) -> None:
        """Columns ``path_id, t, X``."""
        vals = np.atleast_2d(self.values)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["path_id", "t", "X"])
            for p, row in enumerate(vals):
                for t, x in zip(self.times, row):
                    w.writerow([p, f"{t:.17g}", f"{x:.17g}"])


@dataclass
class CoupledSample:
    """A sample path together with the Lévy path and stationary values that built it."""

    path: SamplePath
    y: np.ndarray
    knots: np.ndarray = field(repr=False)
    levy_values: np.ndarray = field(repr=False)
    i_shift: np.ndarray = field(repr=False)
    i_top: int = 0
    horizon: float = 0.0
    time_scale: float = 1.0


def default_horizon(times, time_scale: float = 1.0) -> float:
    """Smallest-plus-one horizon with every ``t / T`` strictly inside ``(0, e^a]``."""
    u_max = float(np.max(times)) / time_scale
    return max(0.0, math.log(u_max)) + 1.0


def sample_lmf(model: LmfModel, times, rng: np.random.Generator, n_paths: int | None = None,
               ) -> CoupledSample:
    """Sample ``X`` at ``times`` and keep the coupling needed for inversion.

    The Lévy path and the stationary process draw from two independent
    substreams spawned from ``rng``.
    """
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("times must be strictly increasing")
    if np.any(t <= 0):
        raise DomainError("times must be positive")
    u = t / model.time_scale
    a = model.horizon
    if np.any(u > math.exp(a) * (1 + 1e-15)):
        raise DomainError(f"times must not exceed T e^a = {model.time_set[1]:.6g}")
    levy_rng, y_rng = rng.spawn(2)
    log_u = np.log(u)
    pts = np.concatenate([np.maximum(a - log_u, 0.0), [a]])
    size = 1 if n_paths is None else n_paths
    knots, L, index = model.levy.sample_path(pts, levy_rng, size=size)
    i_shift, i_top = index[:-1], int(index[-1])
    y = model.stationary.sample_at_times(log_u, y_rng, size=size)
    x = np.exp(L[:, i_shift] - L[:, [i_top]]) * y
    if n_paths is None:
        x, y, L = x[0], y[0], L[0]
    path = SamplePath(times=t, values=x, model=model)
    return CoupledSample(path=path, y=y, knots=knots, levy_values=L, i_shift=i_shift,
                         i_top=i_top, horizon=a, time_scale=model.time_scale)


def sample_lmf_path(model: LmfModel, times, rng: np.random.Generator,
                    n_paths: int | None = None) -> SamplePath:
    """Sample ``X`` at ``times`` (see :func:`sample_lmf`)."""
    return sample_lmf(model, times, rng, n_paths).path


def inverse_lamperti(sample: CoupledSample):
    """Recover the stationary input from a coupled sample.

    Computes ``Y(s) = M(e^{-s}, e^s) X(e^s)`` with ``s = log(t / T)`` and the
    factor taken from the same Lévy path, ``M = exp(L(a) - L(a - s))``.

    Returns
    -------
    s : ndarray
    y : ndarray
    """
    if not isinstance(sample, CoupledSample):
        raise ValueError("inverse_lamperti needs a coupled sample carrying its Lévy path")
    L = sample.levy_values
    factor = np.exp(L[..., [sample.i_top]] - L[..., sample.i_shift]) if L.ndim == 2 else \
        np.exp(L[sample.i_top] - L[sample.i_shift])
    s = np.log(sample.path.times / sample.time_scale)
    return s, factor * sample.path.values


def sample_scaled_coupled(model: LmfModel, lam: float, times, rng: np.random.Generator,
                          n_paths: int | None = None) -> np.ndarray:
    """``M^(a)(lam, t) X^(a)(t)`` with factor and process built from one Lévy path.

    Equals ``X(lam t)`` in finite-dimensional distribution. A factor family
    drawn independently of ``X`` reproduces only the one-dimensional laws,
    because ``M(lam, t2)`` and ``X(t1)`` share Lévy increments when
    ``t1 < t2``; see :func:`independent_pair_cross_moment`.
    """
    if not 0 < lam <= 1:
        raise DomainError("lambda must lie in (0, 1]")
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("times must be strictly increasing")
    u = t / model.time_scale
    a = model.horizon
    if np.any(u <= 0) or np.any(u > math.exp(a) * (1 + 1e-15)):
        raise DomainError(f"times must lie in (0, {model.time_set[1]:.6g}]")
    levy_rng, y_rng = rng.spawn(2)
    log_u = np.log(u)
    pts = np.concatenate([np.maximum(a - log_u, 0.0) - math.log(lam), [a]])
    size = 1 if n_paths is None else n_paths
    _, L, index = model.levy.sample_path(pts, levy_rng, size=size)
    y = model.stationary.sample_at_times(log_u, y_rng, size=size)
    out = np.exp(L[:, index[:-1]] - L[:, [index[-1]]]) * y
    return out[0] if n_paths is None else out


def independent_pair_cross_moment(model: LmfModel, lam: float, t: float, s: float) -> float:
    """``E[M(lam, t) M(lam, s)] E[X(t) X(s)]`` for factors independent of ``X``.

    For ``t, s <= T`` the factors use Lévy increments over
    ``[-log u, -log u - log lam]`` which overlap by
    ``max(0, -log lam - |log t - log s|)``. The product equals
    ``E[X(lam t) X(lam s)]`` only when ``t = s``.
    """
    if not (0 < t <= model.time_scale and 0 < s <= model.time_scale):
        raise DomainError("t and s must lie in (0, T]")
    psi = model.levy.laplace_exponent
    c = -math.log(lam)
    ov = max(0.0, c - abs(math.log(t) - math.log(s)))
    return math.exp(psi(2.0) * ov + 2.0 * psi(1.0) * (c - ov)) * theoretical_cov(model, t, s)


def time_invert(path: SamplePath) -> SamplePath:
    """``Xbar(t) = X(1/t)``; maps scale set ``(0, 1]`` to ``[1, inf)``."""
    if np.any(path.times <= 0):
        raise ValueError("time inversion needs positive times")
    meta = dict(path.meta, inverted=not path.meta.get("inverted", False))
    return SamplePath(times=1.0 / path.times[::-1], values=path.values[..., ::-1],
                      seed=path.seed, model=path.model, meta=meta)


def rescale_time(path: SamplePath, T: float) -> SamplePath:
    """``Xtilde(t) = X(t / T)``: the same values on the time grid ``T * t``."""
    if T <= 0:
        raise ValueError("T must be positive")
    meta = dict(path.meta, time_scale=path.meta.get("time_scale", 1.0) * T)
    return SamplePath(times=path.times * T, values=path.values, seed=path.seed,
                      model=path.model, meta=meta)


def valid_moment_range(model: LmfModel, two_sided: bool = True) -> tuple[float, float]:
    """Open ``q`` interval where ``E|X(t)|^q`` is finite for all ``t`` in the time set."""
    lo, hi = model.levy.psi_domain
    if two_sided and model.horizon > 0:
        lo, hi = max(lo, -hi), min(hi, -lo)
    ylo, yhi = model.stationary.moment_range
    return (max(lo, ylo), min(hi, yhi))


def theoretical_moment(model: LmfModel, q: float, t, x1_moment: float | None = None):
    """``E|X(t)|^q``: ``u^{-psi(q)} m`` for ``u <= 1`` and ``u^{psi(-q)} m`` for ``u > 1``.

    ``u = t / T`` and ``m = E|X(T)|^q = E|Y(0)|^q`` unless ``x1_moment`` is given.
    """
    u = np.asarray(t, dtype=float) / model.time_scale
    if np.any(u <= 0):
        raise DomainError("t must be positive")
    lo, hi = valid_moment_range(model, two_sided=bool(np.any(u > 1)))
    if q != 0 and not lo < q < hi:
        raise DomainError(f"q={q} outside the valid moment range ({lo}, {hi})")
    if q == 0:
        return np.ones_like(u) if u.ndim else 1.0
    m = model.stationary.abs_moment(q) if x1_moment is None else x1_moment
    psi = model.levy.laplace_exponent
    below = u ** (-psi(q)) * m
    out = below if np.all(u <= 1) else np.where(u <= 1, below, u ** psi(-q) * m)
    return float(out) if np.ndim(out) == 0 else out


def _levy_cross_factor(psi, u, v):
    """``E[exp(L(a - log u) - L(a) + L(a - log v) - L(a))]`` for ``u >= v``."""
    if u > 1 and v > 1:
        return u ** psi(-1) * v ** (psi(-2) - psi(-1))
    if u > 1:
        return u ** psi(-1) * v ** (-psi(1))
    return u ** (psi(1) - psi(2)) * v ** (-psi(1))


def theoretical_cov(model: LmfModel, t: float, s: float) -> float:
    """``E[X(t) X(s)]``.

    Matched models (second-order stationary increments) use
    ``T^{psi(2)} EY0^2 / 2 * (t^{-psi(2)} + s^{-psi(2)} - |t - s|^{-psi(2)})``;
    otherwise the three-case product of Lévy and stationary cross moments.
    """
    if t <= 0 or s <= 0:
        raise DomainError("times must be positive")
    T = model.time_scale
    if t > model.time_set[1] * (1 + 1e-12) or s > model.time_set[1] * (1 + 1e-12):
        raise DomainError("times outside the model's time set")
    if not (model.levy.in_psi_domain([1, 2]) and
            (model.horizon == 0 or model.levy.in_psi_domain([-1, -2]))):
        raise DomainError("second moments of the scaling factors are undefined")
    if model.stationary.moment_range[1] <= 2:
        raise DomainError("the stationary input has no finite second moment")
    ey0sq = float(model.stationary.cross_moment(0.0))
    psi = model.levy.laplace_exponent
    if model.matched and max(t, s) <= T:
        p2 = psi(2)
        return 0.5 * T ** p2 * ey0sq * (t ** -p2 + s ** -p2 - abs(t - s) ** -p2)
    u, v = max(t, s) / T, min(t, s) / T
    gamma = model.stationary.cross_moment(math.log(u) - math.log(v))
    return float(_levy_cross_factor(psi, u, v) * gamma)


def mbm_analog_preset(sigma: float, T: float = 1.0) -> LmfModel:
    """Multifractal analog of Brownian motion on ``(0, T]``.

    Brownian Lévy part with drift ``-1/2 - sigma^2`` (so ``psi(2) = -1``) and an
    OU input of rate ``psi(1) + 1 = (1 - sigma^2) / 2``; needs ``0 < sigma < 1``
    for that rate to be positive. ``E X(t) X(s) = min(t, s) / T``.
    """
    if not 0 < sigma < 1:
        raise DomainError(
            f"sigma={sigma} must lie in (0, 1): the OU rate psi(1) + 1 = (1 - sigma^2)/2 "
            "must be positive")
    levy = BrownianWithDrift(drift=-0.5 - sigma ** 2, volatility=sigma)
    rate = levy.laplace_exponent(1.0) + 1.0
    return LmfModel(levy=levy, stationary=OrnsteinUhlenbeck(rate=rate, variance=1.0),
                    horizon=0.0, time_scale=float(T), matched=True)
