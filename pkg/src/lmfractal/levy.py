"""Lévy processes described by their exponents, with exact increment samplers.

Each model exposes

* the Laplace exponent ``psi(q) = log E[exp(q L(1))]`` on its open domain,
* the characteristic exponent ``Psi(theta) = log E[exp(i theta L(1))]``,
* an exact sampler of independent increments over arbitrary durations.

Models are frozen dataclasses; samplers take an explicit generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_INF = math.inf


def _as_durations(durations) -> np.ndarray:
    d = np.atleast_1d(np.asarray(durations, dtype=float))
    if d.ndim != 1:
        raise ValueError("durations must be one-dimensional")
    if not np.all(d > 0) or not np.all(np.isfinite(d)):
        raise ValueError("durations must be finite and strictly positive")
    return d


def _shape(size, n):
    return (n,) if size is None else (int(size), n)


class LevyModel:
    """Base class. Subclasses implement ``_psi``, ``_char`` and ``_sample``."""

    kind = "abstract"

    @property
    def psi_domain(self) -> tuple[float, float]:
        """Open interval of real ``q`` on which ``psi(q)`` is finite."""
        return (-_INF, _INF)

    def in_psi_domain(self, q) -> bool:
        lo, hi = self.psi_domain
        q = np.asarray(q, dtype=float)
        return bool(np.all((q > lo) & (q < hi)))

    def laplace_exponent(self, q):
        """Laplace exponent ``psi(q)``; raises :class:`DomainError` off the domain."""
        if not self.in_psi_domain(q):
            lo, hi = self.psi_domain
            raise DomainError(
                f"{self.kind}: q={q!r} outside the Laplace-exponent domain ({lo}, {hi})")
        out = self._psi(np.asarray(q, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def characteristic_exponent(self, theta):
        """Characteristic exponent ``Psi(theta)`` (complex)."""
        out = self._char(np.asarray(theta, dtype=float))
        return complex(out) if np.ndim(out) == 0 else out

    def sample_increments(self, durations, rng: np.random.Generator, size=None) -> np.ndarray:
        """Independent increments ``L(d_k)`` over each duration.

        Returns an array of shape ``(len(durations),)`` or, with ``size``,
        ``(size, len(durations))``.
        """
        return self._sample(_as_durations(durations), rng, size)

    def sample_path(self, points, rng: np.random.Generator, size=None, atol=None):
        """Values of one path ``L(s)`` at the non-negative ``points``.

        Points within ``atol`` of each other (default ``1e-12 * max(1, max s)``)
        are merged so that coincident times carry bit-identical values. Zero
        maps to ``L(0) = 0`` exactly. Increments are drawn from the largest
        ``s`` downward.

        Returns
        -------
        knots : ndarray
            Sorted distinct points, starting with 0.
        values : ndarray
            ``L`` at ``knots``, shape ``(len(knots),)`` or ``(size, len(knots))``.
        index : ndarray
            Index into ``knots`` of every entry of ``points`` (same shape).
        """
        pts = np.asarray(points, dtype=float)
        if np.any(pts < 0) or not np.all(np.isfinite(pts)):
            raise ValueError("path points must be finite and non-negative")
        if atol is None:
            atol = 1e-12 * max(1.0, float(pts.max(initial=0.0)))
        flat = np.concatenate([[0.0], pts.ravel()])
        order = np.argsort(flat, kind="stable")
        srt = flat[order]
        new_knot = np.zeros(srt.size, dtype=bool)
        new_knot[0] = True
        # gaps measured from the first point of the current cluster
        group = np.empty(srt.size, dtype=np.intp)
        g, anchor = 0, srt[0]
        group[0] = 0
        for i in range(1, srt.size):
            if srt[i] - anchor > atol:
                g += 1
                anchor = srt[i]
                new_knot[i] = True
            group[i] = g
        knots = srt[new_knot]
        knots[0] = 0.0
        inverse = np.empty(flat.size, dtype=np.intp)
        inverse[order] = group
        index = inverse[1:].reshape(pts.shape)

        n = knots.size - 1
        shape = (n + 1,) if size is None else (int(size), n + 1)
        values = np.zeros(shape)
        if n:
            durations = np.diff(knots)
            rev = self.sample_increments(durations[::-1], rng, size)
            values[..., 1:] = np.cumsum(rev[..., ::-1], axis=-1)
        return knots, values, index

    def to_dict(self) -> dict:
        return {"kind": self.kind, **{k: v for k, v in self.__dict__.items()}}


@dataclass(frozen=True)
class BrownianWithDrift(LevyModel):
    """``L(s) = drift * s + volatility * B(s)``."""

    drift: float
    volatility: float
    kind = "brownian"

    def __post_init__(self):
        if self.volatility < 0:
            raise ValueError("volatility must be non-negative")

    def _psi(self, q):
        return self.drift * q + 0.5 * self.volatility ** 2 * q * q

    def _char(self, theta):
        return 1j * self.drift * theta - 0.5 * self.volatility ** 2 * theta * theta

    def _sample(self, d, rng, size):
        z = rng.standard_normal(_shape(size, d.size))
        return self.drift * d + self.volatility * np.sqrt(d) * z


@dataclass(frozen=True)
class DeterministicDrift(LevyModel):
    """Degenerate Lévy process ``L(s) = -hurst * s``; yields self-similar processes."""

    hurst: float
    kind = "drift"

    def _psi(self, q):
        return -self.hurst * q

    def _char(self, theta):
        return -1j * self.hurst * theta + 0.0 * theta

    def _sample(self, d, rng, size):
        return np.broadcast_to(-self.hurst * d, _shape(size, d.size)).copy()


@dataclass(frozen=True)
class CompoundPoissonNormal(LevyModel):
    """Compound Poisson process with ``N(jump_mean, jump_sd**2)`` jumps at ``rate``."""

    rate: float
    jump_mean: float = 0.0
    jump_sd: float = 1.0
    kind = "compound-poisson"

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if self.jump_sd < 0:
            raise ValueError("jump_sd must be non-negative")

    def _psi(self, q):
        return self.rate * np.expm1(self.jump_mean * q + 0.5 * self.jump_sd ** 2 * q * q)

    def _char(self, theta):
        return self.rate * (np.exp(1j * self.jump_mean * theta
                                   - 0.5 * self.jump_sd ** 2 * theta * theta) - 1.0)

    def sample_jumps(self, durations, rng: np.random.Generator, size=None):
        """Jump counts and increments over each duration."""
        d = _as_durations(durations)
        counts = rng.poisson(self.rate * np.broadcast_to(d, _shape(size, d.size)))
        z = rng.standard_normal(counts.shape)
        return counts, self.jump_mean * counts + self.jump_sd * np.sqrt(counts) * z

    def _sample(self, d, rng, size):
        return self.sample_jumps(d, rng, size)[1]


@dataclass(frozen=True)
class GammaProcess(LevyModel):
    """Gamma subordinator: ``L(s) ~ Gamma(shape * s, rate)``."""

    shape: float
    rate: float
    kind = "gamma"

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError("shape and rate must be positive")

    @property
    def psi_domain(self):
        return (-_INF, self.rate)

    def _psi(self, q):
        return -self.shape * np.log1p(-q / self.rate)

    def _char(self, theta):
        return -self.shape * np.log(1.0 - 1j * theta / self.rate)

    def _sample(self, d, rng, size):
        return rng.gamma(self.shape * np.broadcast_to(d, _shape(size, d.size)), 1.0 / self.rate)


KINDS = {
    "brownian": BrownianWithDrift,
    "drift": DeterministicDrift,
    "compound-poisson": CompoundPoissonNormal,
    "gamma": GammaProcess,
}


def from_dict(spec: dict) -> LevyModel:
    """Build a model from ``{"kind": name, **params}``."""
    params = dict(spec)
    kind = params.pop("kind", None)
    if kind not in KINDS:
        raise ValueError(f"unknown levy kind {kind!r}; expected one of {sorted(KINDS)}")
    return KINDS[kind](**params)
