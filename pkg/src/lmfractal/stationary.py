"""Strictly stationary input processes and the covariance tools around them."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import ConstructionError, DomainError, ResourceError

MAX_GRAM_SIZE = 2048


def _check_times(times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1:
        raise ValueError("times must be one-dimensional")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("times must be strictly increasing")
    return t


def gaussian_abs_moment(q, variance: float):
    """``E|Y|^q`` for ``Y ~ N(0, variance)``, finite for ``q > -1``."""
    q = np.asarray(q, dtype=float)
    if np.any(q <= -1):
        raise DomainError("absolute Gaussian moments exist only for q > -1")
    out = (2.0 * variance) ** (q / 2) * gamma_fn((q + 1) / 2) / math.sqrt(math.pi)
    return float(out) if out.ndim == 0 else out


class StationaryModel:
    """Base class for zero-lag-indexed stationary processes ``Y(u), u in R``."""

    kind = "abstract"
    mean = 0.0

    @property
    def moment_range(self) -> tuple[float, float]:
        """Open interval of ``q`` with ``E|Y(0)|^q < inf``."""
        return (-1.0, math.inf)

    def covariance(self, h):
        raise NotImplementedError

    def cross_moment(self, h):
        """``E[Y(u + h) Y(u)]``."""
        return self.covariance(h) + self.mean ** 2

    def abs_moment(self, q):
        raise NotImplementedError

    def sample_at_times(self, times, rng: np.random.Generator, size=None) -> np.ndarray:
        """Exact joint sample at strictly increasing ``times``.

        Shape ``(len(times),)`` or ``(size, len(times))``.
        """
        return self._sample(_check_times(times), rng, size)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **{k: v for k, v in self.__dict__.items()}}


@dataclass(frozen=True)
class Constant(StationaryModel):
    value: float = 1.0
    kind = "constant"

    @property
    def mean(self):
        return self.value

    @property
    def moment_range(self):
        if self.value == 0:
            return (0.0, math.inf)
        return (-math.inf, math.inf)

    def covariance(self, h):
        return np.zeros_like(np.asarray(h, dtype=float))

    def abs_moment(self, q):
        return abs(self.value) ** np.asarray(q, dtype=float)

    def _sample(self, t, rng, size):
        shape = t.shape if size is None else (int(size), t.size)
        return np.full(shape, float(self.value))


@dataclass(frozen=True)
class OrnsteinUhlenbeck(StationaryModel):
    """Stationary Gaussian Markov process with covariance ``variance * exp(-rate |h|)``."""

    rate: float
    variance: float = 1.0
    kind = "ou"

    def __post_init__(self):
        if self.rate <= 0 or self.variance <= 0:
            raise ValueError("OU rate and variance must be positive")

    def covariance(self, h):
        return self.variance * np.exp(-self.rate * np.abs(np.asarray(h, dtype=float)))

    def abs_moment(self, q):
        return gaussian_abs_moment(q, self.variance)

    def _sample(self, t, rng, size):
        shape = (t.size,) if size is None else (int(size), t.size)
        z = rng.standard_normal(shape)
        out = np.empty(shape)
        sd = math.sqrt(self.variance)
        out[..., 0] = sd * z[..., 0]
        for k in range(1, t.size):
            dt = t[k] - t[k - 1]
            innov = sd * math.sqrt(-math.expm1(-2.0 * self.rate * dt))
            out[..., k] = math.exp(-self.rate * dt) * out[..., k - 1] + innov * z[..., k]
        return out


@dataclass(frozen=True)
class GaussianFromCovariance(StationaryModel):
    """Zero-mean stationary Gaussian process with a user-supplied covariance.

    Equispaced time grids are sampled by circulant embedding; other grids fall
    back to a symmetric square root of the Gram matrix.
    """

    cov: Callable = field(compare=False)
    name: str = "custom"
    kind = "gaussian"

    def covariance(self, h):
        return np.asarray(self.cov(np.abs(np.asarray(h, dtype=float))), dtype=float)

    def abs_moment(self, q):
        return gaussian_abs_moment(q, float(self.covariance(0.0)))

    def _sample(self, t, rng, size):
        if t.size > 2 and np.allclose(np.diff(t), t[1] - t[0], rtol=1e-10, atol=0):
            return sample_gaussian_from_covariance(self.cov, t, rng, size)
        gram = self.covariance(t[:, None] - t[None, :])
        w, v = np.linalg.eigh(gram)
        if w.min() < -1e-9 * max(gram[0, 0], 1e-300):
            raise ConstructionError("covariance matrix is not positive semidefinite",
                                    min_eigenvalue=float(w.min()))
        root = v * np.sqrt(np.clip(w, 0, None))
        shape = (t.size,) if size is None else (int(size), t.size)
        return rng.standard_normal(shape) @ root.T

    def to_dict(self):
        return {"kind": self.kind, "name": self.name}


def gamma_from_psi(psi1: float, psi2: float, ey0sq: float, h):
    """Covariance of the stationary input that gives second-order stationary increments.

    ``gamma(h) = ey0sq/2 * exp(-psi1 h) * (1 + exp(psi2 h) - (1 - exp(-h))**(-psi2))``
    for ``h > 0``; ``gamma(0) = ey0sq``.
    """
    if ey0sq <= 0:
        raise ValueError("ey0sq must be positive")
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("h must be non-negative")
    hp = np.where(h > 0, h, 1.0)
    # 1 - (1 - e^-h)^(-psi2) via expm1/log1p: the bracket cancels for large h
    tail = -np.expm1(-psi2 * np.log1p(-np.exp(-hp)))
    val = 0.5 * ey0sq * (np.exp(-psi1 * hp) * tail + np.exp((psi2 - psi1) * hp))
    out = np.where(h > 0, val, ey0sq)
    return float(out) if out.ndim == 0 else out


def check_positive_semidefinite(cov: Callable, grid, rtol: float = 1e-9):
    """Whether the Gram matrix ``[cov(|t_i - t_j|)]`` is PSD up to ``-rtol * cov(0)``.

    Returns
    -------
    ok : bool
    min_eigenvalue : float
    """
    g = _check_times(grid)
    if g.size > MAX_GRAM_SIZE:
        raise ResourceError(f"grid of size {g.size} exceeds the limit {MAX_GRAM_SIZE}")
    gram = np.asarray(cov(np.abs(g[:, None] - g[None, :])), dtype=float)
    lam_min = float(np.linalg.eigvalsh(gram).min())
    c0 = float(np.asarray(cov(np.zeros(1)))[0])
    return lam_min >= -rtol * abs(c0), lam_min


def circulant_eigenvalues(cov: Callable, n: int, step: float) -> np.ndarray:
    """Eigenvalues of the minimal circulant embedding of an ``n``-point grid."""
    c = np.asarray(cov(step * np.arange(n)), dtype=float)
    row = np.concatenate([c, c[-2:0:-1]])
    return np.fft.fft(row).real


def sample_gaussian_from_covariance(cov: Callable, grid, rng: np.random.Generator,
                                   size=None, rtol: float = 1e-9) -> np.ndarray:
    """Zero-mean stationary Gaussian sequence on an equispaced grid (circulant embedding)."""
    g = _check_times(grid)
    n = g.size
    shape = (n,) if size is None else (int(size), n)
    if n == 1:
        return math.sqrt(float(cov(np.zeros(1))[0])) * rng.standard_normal(shape)
    step = g[1] - g[0]
    if not np.allclose(np.diff(g), step, rtol=1e-10, atol=0):
        raise ValueError("circulant embedding needs an equispaced grid")
    lam = circulant_eigenvalues(cov, n, step)
    m = lam.size
    c0 = float(np.asarray(cov(np.zeros(1)))[0])
    if lam.min() < -rtol * abs(c0) * m:
        raise ConstructionError(
            f"circulant embedding has negative eigenvalue {lam.min():.3e}",
            min_eigenvalue=float(lam.min()))
    scale = np.sqrt(np.clip(lam, 0, None) / m)
    reps = 1 if size is None else int(size)
    z = rng.standard_normal((reps, m)) + 1j * rng.standard_normal((reps, m))
    out = np.fft.fft(scale * z, axis=-1)[:, :n].real
    return out[0] if size is None else out


def write_covariance_csv(model: StationaryModel, lags, path) -> None:
    """Two columns ``lag, value`` with 17 significant digits."""
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    vals = np.broadcast_to(model.covariance(lags), lags.shape)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["lag", "value"])
        for h, c in zip(lags, vals):
            w.writerow([f"{h:.17g}", f"{c:.17g}"])


KINDS = {"constant": Constant, "ou": OrnsteinUhlenbeck}


def from_dict(spec: dict) -> StationaryModel:
    params = dict(spec)
    kind = params.pop("kind", None)
    if kind not in KINDS:
        raise ValueError(f"unknown stationary kind {kind!r}; expected one of {sorted(KINDS)}")
    return KINDS[kind](**params)
