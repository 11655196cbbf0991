"""Log-infinitely divisible cascades over cones in the half-plane.

The field ``omega_l(t)`` is an independently scattered random measure of the
cone ``A_l(t) = {(u, v): v >= l, |u - t| <= f(v)/2}`` with ``f(v) = min(v, T)``.
The control measure has density ``v**-2``, which gives
``mu(A_l(t)) = 1 + log(T / l)``.

Only the Gaussian base law is simulated; the characteristic-function
formulas accept any characteristic exponent.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ConstructionError, DomainError


@dataclass(frozen=True)
class CascadeSpec:
    """Gaussian cascade: integral scale ``T``, truncation ``l``, variance per unit measure.

    The field mean is ``-variance / 2`` per unit measure so that ``psi(1) = 0``.
    ``n`` cells of width ``length / n`` discretize ``[0, length]`` (default ``T``).
    """

    T: float = 1.0
    l: float = 1.0 / 256
    variance: float = 0.2
    n: int = 512
    length: float | None = None

    def __post_init__(self):
        if self.T <= 0 or self.l <= 0:
            raise DomainError("T and l must be positive")
        if self.l > self.T:
            raise DomainError(f"truncation l={self.l} exceeds the integral scale T={self.T}")
        if self.variance < 0:
            raise DomainError("variance must be non-negative")
        if self.n < 2:
            raise DomainError("need at least 2 cells")

    @property
    def span(self) -> float:
        return self.T if self.length is None else self.length

    @property
    def theta_c(self) -> float:
        return math.inf

    def characteristic_exponent(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -0.5j * self.variance * theta - 0.5 * self.variance * theta ** 2

    def laplace_exponent(self, q):
        q = np.asarray(q, dtype=float)
        return -0.5 * self.variance * q + 0.5 * self.variance * q ** 2

    __call__ = characteristic_exponent


def _f(v, T):
    return np.minimum(v, T)


# ---------------------------------------------------------------- closed forms

def cone_measure(spec: CascadeSpec, t: float = 0.0) -> float:
    """``mu(A_l(t)) = 1 + log(T / l)``; does not depend on ``t``."""
    return _cone_measure(spec.T, spec.l)


def _cone_measure(T, l):
    return 1.0 + math.log(T / l) if l <= T else T / l


def _intersection(T, l1, l2, d):
    """Measure of the intersection of two cones.

    ``l1, l2`` are the truncations and ``d`` the distance between centres.
    """
    d = abs(d)
    if d >= T:
        return 0.0
    m = max(l1, l2)
    if m > T:
        return (T - d) / m
    lower = max(m, d)
    return math.log(T / lower) + 1.0 - d / lower


def omega_covariance(spec: CascadeSpec, tau):
    """``Cov(omega_l(t), omega_l(t + tau)) = variance * mu(A_l(t) & A_l(t + tau))``.

    The intersection measure is ``1 + log(T/l) - tau/l`` for ``tau <= l``,
    ``log(T/tau)`` for ``l < tau <= T`` and 0 beyond ``T``.
    """
    tau = np.abs(np.asarray(tau, dtype=float))
    T, l = spec.T, spec.l
    with np.errstate(divide="ignore"):
        inter = np.where(tau <= l, 1.0 + np.log(T / l) - tau / l,
                         np.where(tau <= T, np.log(T / np.where(tau > 0, tau, 1.0)), 0.0))
    out = spec.variance * inter
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PairMeasures:
    """Measures of ``B1 = A1 - A2``, ``B2 = A1 & A2``, ``B3 = A2 - A1`` and a quadrature check.

    ``A_k = A_{lam_k l}(lam_k t)``. ``small_l`` marks the regime
    ``(lam1 - lam2) t >= lam1 l`` in which the measures reduce to the
    logarithmic closed forms returned by :func:`pair_measures_small_l`.
    """

    b1: float
    b2: float
    b3: float
    numeric: tuple
    small_l: bool

    @property
    def max_abs_error(self) -> float:
        return max(abs(a - b) for a, b in zip((self.b1, self.b2, self.b3), self.numeric))


def _check_pair(spec, t, lam1, lam2):
    if not 0 < lam2 < lam1 <= 1:
        raise ValueError("need 0 < lam2 < lam1 <= 1")
    if not 0 < t <= spec.T:
        raise ValueError("need 0 < t <= T")
    if spec.l > t:
        raise ValueError("need l <= t")


def pair_measures_small_l(spec: CascadeSpec, t: float, lam1: float, lam2: float):
    """Logarithmic closed forms of ``mu(B1), mu(B2), mu(B3)`` for small truncation."""
    _check_pair(spec, t, lam1, lam2)
    T, l = spec.T, spec.l
    b1 = math.log((lam1 - lam2) / lam1) + math.log(t / l) + 1.0
    b2 = math.log(1.0 / (lam1 - lam2)) + math.log(T / t)
    b3 = math.log((lam1 - lam2) / lam2) + math.log(t / l) + 1.0
    return b1, b2, b3


def cone_pair_measures(spec: CascadeSpec, t: float, lam1: float, lam2: float) -> PairMeasures:
    """Exact measures of the three pieces of two scaled cones, with a quadrature cross-check."""
    _check_pair(spec, t, lam1, lam2)
    T, l = spec.T, spec.l
    d = (lam1 - lam2) * t
    b2 = _intersection(T, lam1 * l, lam2 * l, d)
    b1 = _cone_measure(T, lam1 * l) - b2
    b3 = _cone_measure(T, lam2 * l) - b2
    cones = [(lam1 * t, lam1 * l), (lam2 * t, lam2 * l)]
    numeric = (numeric_cone_measure(T, cones, include=[0], exclude=[1]),
               numeric_cone_measure(T, cones, include=[0, 1]),
               numeric_cone_measure(T, cones, include=[1], exclude=[0]))
    return PairMeasures(b1=b1, b2=b2, b3=b3, numeric=numeric, small_l=d >= lam1 * l)


# ---------------------------------------------------------- quadrature oracle

def _cross_section(T, cones, include, exclude, v):
    """Total ``u``-length at height ``v`` of the region inside every ``include`` cone
    and outside every ``exclude`` cone."""
    lo, hi = -math.inf, math.inf
    for k in include:
        c, l = cones[k]
        if v < l:
            return 0.0
        w = min(v, T) / 2
        lo, hi = max(lo, c - w), min(hi, c + w)
    if hi <= lo:
        return 0.0
    pieces = [(lo, hi)]
    for k in exclude or ():
        c, l = cones[k]
        if v < l:
            continue
        w = min(v, T) / 2
        a, b = c - w, c + w
        nxt = []
        for p, q in pieces:
            if b <= p or a >= q:
                nxt.append((p, q))
                continue
            if a > p:
                nxt.append((p, a))
            if b < q:
                nxt.append((b, q))
        pieces = nxt
    return sum(q - p for p, q in pieces)


def numeric_cone_measure(T, cones, include, exclude=None) -> float:
    """Quadrature of ``v**-2`` over a Boolean combination of cones.

    ``cones`` is a list of ``(centre, truncation)``. The inner ``u``-integral
    is the exact length of the cross-section; the outer ``v``-integral is
    adaptive quadrature split at every height where the cross-section
    changes form.
    """
    breaks = {T}
    for c, l in cones:
        breaks.add(l)
    for i, (ci, _) in enumerate(cones):
        for cj, _ in cones[i + 1:]:
            breaks.add(abs(ci - cj))
            breaks.add(2 * abs(ci - cj))
    v0 = min(cones[k][1] for k in include)
    pts = sorted(b for b in breaks if b > v0)
    edges = [v0] + pts
    def f(v):
        return _cross_section(T, cones, include, exclude, v) / (v * v)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    # beyond the last break the cross-section is constant
    top = edges[-1]
    total += _cross_section(T, cones, include, exclude, 2 * top + T) / top
    return total


def numeric_omega_covariance(spec: CascadeSpec, tau: float) -> float:
    """Quadrature value of :func:`omega_covariance` at one lag."""
    cones = [(0.0, spec.l), (abs(tau), spec.l)]
    return spec.variance * numeric_cone_measure(spec.T, cones, include=[0, 1])


# ------------------------------------------------------------------ simulation

@functools.lru_cache(maxsize=16)
def _field_root(spec: CascadeSpec):
    dt = spec.span / spec.n
    lags = dt * np.arange(spec.n)
    col = omega_covariance(spec, lags)
    cov = col[np.abs(np.arange(spec.n)[:, None] - np.arange(spec.n)[None, :])]
    w, v = np.linalg.eigh(cov)
    if w.min() < -1e-9 * max(cov[0, 0], 1e-300):
        raise ConstructionError("cone covariance matrix is not positive semidefinite",
                                min_eigenvalue=float(w.min()))
    return v * np.sqrt(np.clip(w, 0, None))


def cell_edges(spec: CascadeSpec) -> np.ndarray:
    """Right cell edges ``t_i = (i + 1) * length / n``."""
    return spec.span / spec.n * np.arange(1, spec.n + 1)


def simulate_lognormal_cascade(spec: CascadeSpec, rng: np.random.Generator,
                               n_replicas: int | None = None) -> np.ndarray:
    """Cumulative measure ``Q_l([0, t_i])`` at the right cell edges.

    ``omega_l`` is sampled exactly at cell centres (mean
    ``-variance/2 * (1 + log(T/l))``, covariance :func:`omega_covariance`)
    and ``Q_l`` is the Riemann sum of ``exp(omega_l)``.
    """
    reps = 1 if n_replicas is None else int(n_replicas)
    dt = spec.span / spec.n
    if spec.variance == 0:
        q = np.broadcast_to(cell_edges(spec), (reps, spec.n)).copy()
    else:
        root = _field_root(spec)
        mean = -0.5 * spec.variance * cone_measure(spec)
        omega = mean + rng.standard_normal((reps, spec.n)) @ root.T
        q = np.cumsum(np.exp(omega) * dt, axis=1)
    return q[0] if n_replicas is None else q


def cascade_moment_ratio_exponent(spec: CascadeSpec, q: float) -> float:
    """Limit value of ``log2(E X(t)^q / E X(t/2)^q)``, i.e. ``q - psi(q)``."""
    return float(q - spec.laplace_exponent(q))


# --------------------------------------------------- characteristic functions

def _exponent(spec_or_psi) -> Callable:
    if isinstance(spec_or_psi, CascadeSpec):
        return spec_or_psi.characteristic_exponent
    if callable(spec_or_psi):
        return spec_or_psi
    raise TypeError("expected a CascadeSpec or a characteristic exponent")


def pair_cf_scaling_process(spec_or_psi, a1, a2, s1, s2) -> complex:
    """Joint characteristic function of ``(Z(s1) + s1, Z(s2) + s2)`` for the cascade.

    ``exp{Psi(a1) s1 + Psi(a2) s2 + log(e^{-s1} - e^{-s2}) (Psi(a1) + Psi(a2) - Psi(a1 + a2))}``
    """
    if not 0 < s1 < s2:
        raise ValueError("need 0 < s1 < s2")
    psi = _exponent(spec_or_psi)
    coupling = psi(a1) + psi(a2) - psi(a1 + a2)
    return complex(np.exp(psi(a1) * s1 + psi(a2) * s2
                          + math.log(math.exp(-s1) - math.exp(-s2)) * coupling))


def pair_cf_levy(spec_or_psi, a1, a2, s1, s2) -> complex:
    """Joint characteristic function of ``(L(s1), L(s2))``.

    ``L`` is the Lévy process with characteristic exponent ``Psi``.
    """
    if not 0 < s1 < s2:
        raise ValueError("need 0 < s1 < s2")
    psi = _exponent(spec_or_psi)
    return complex(np.exp(psi(a2) * (s2 - s1) + psi(a1 + a2) * s1))


DEFAULT_CF_GRID = tuple(
    (a1, a2, s1, s2)
    for a1 in (-1.0, 0.5, 1.0, 2.0)
    for a2 in (-2.0, 0.5, 1.0)
    for s1, s2 in ((0.25, 0.5), (0.5, 1.0), (1.0, 3.0))
)


def non_levy_gap(spec_or_psi, grid=DEFAULT_CF_GRID) -> float:
    """Largest ``|CF_cascade - CF_levy|`` over a grid of ``(a1, a2, s1, s2)``."""
    return max(abs(pair_cf_scaling_process(spec_or_psi, *g) - pair_cf_levy(spec_or_psi, *g))
               for g in grid)
