"""Scaling-factor families built from one Lévy path.

For a horizon ``a >= 0`` the family is

    M(lam, t) = exp(L(a - log t - log lam) - L(a - log t)),  lam in (0, 1], t <= e^a,

so products telescope exactly along a shared path and factors built on
disjoint stretches of the path are independent.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .levy import LevyModel


@dataclass
class ScalingFactorGrid:
    """Joint samples of ``M(lam_i, t_j)`` sharing one Lévy path per replica.

    ``values`` has shape ``(n_paths, len(lambdas), len(times))``; ``knots`` and
    ``levy_values`` hold the underlying path.
    """

    horizon: float
    lambdas: np.ndarray
    times: np.ndarray
    values: np.ndarray
    knots: np.ndarray = field(repr=False)
    levy_values: np.ndarray = field(repr=False)
    index: np.ndarray = field(repr=False)

    def factor(self, lam: float, t: float) -> np.ndarray:
        """Samples of ``M(lam, t)`` for grid members ``lam`` and ``t``."""
        i = _locate(self.lambdas, lam, "lambda")
        j = _locate(self.times, t, "t")
        return self.values[:, i, j]

    def write_csv(self, path) -> None:
        """Columns ``lambda, t, value, path_id``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["lambda", "t", "value", "path_id"])
            for p in range(self.values.shape[0]):
                for i, lam in enumerate(self.lambdas):
                    for j, t in enumerate(self.times):
                        w.writerow([f"{lam:.17g}", f"{t:.17g}", f"{self.values[p, i, j]:.17g}", p])


def _locate(grid, x, name):
    hits = np.flatnonzero(np.isclose(grid, x, rtol=1e-12, atol=0))
    if hits.size == 0:
        raise KeyError(f"{name}={x} is not on the grid")
    return int(hits[0])


def sample_scaling_grid(levy: LevyModel, a: float, lambdas, times,
                        rng: np.random.Generator, n_paths: int = 1) -> ScalingFactorGrid:
    """Sample ``M^(a)(lam, t)`` on a ``(lambdas, times)`` grid.

    One Lévy path per replica is drawn at the union of the points
    ``a - log t - log lam`` and ``a - log t``; all grid entries of a replica
    come from that path.
    """
    if a < 0:
        raise DomainError("horizon a must be non-negative")
    lam = np.sort(np.atleast_1d(np.asarray(lambdas, dtype=float)))
    t = np.sort(np.atleast_1d(np.asarray(times, dtype=float)))
    if np.any(lam <= 0) or np.any(lam > 1):
        raise DomainError("lambdas must lie in (0, 1]")
    if np.any(t <= 0):
        raise DomainError("times must be positive")
    if np.any(t > np.exp(a) * (1 + 1e-15)):
        raise DomainError(f"times must not exceed e^a = {np.exp(a):.6g}")
    base = np.maximum(a - np.log(t), 0.0)
    shifted = base[None, :] - np.log(lam)[:, None]
    pts = np.concatenate([shifted.ravel(), base])
    knots, L, index = levy.sample_path(pts, rng, size=n_paths)
    i_shift = index[: shifted.size].reshape(shifted.shape)
    i_base = index[shifted.size:]
    values = np.exp(L[:, i_shift] - L[:, i_base][:, None, :])
    return ScalingFactorGrid(horizon=float(a), lambdas=lam, times=t, values=values,
                             knots=knots, levy_values=L, index=index)


def sample_factor(levy: LevyModel, lam: float, t: float, rng: np.random.Generator,
                  n: int, a: float | None = None) -> np.ndarray:
    """``n`` independent samples of ``M(lam, t)``."""
    if a is None:
        a = max(0.0, float(np.log(t))) + 1.0
    return sample_scaling_grid(levy, a, [lam], [t], rng, n_paths=n).values[:, 0, 0]


def marginal_cf_reference(levy: LevyModel, lam: float, theta):
    """Characteristic function of ``log M(lam, t)``: ``exp(-log(lam) * Psi(theta))``."""
    if not 0 < lam <= 1:
        raise DomainError("lambda must lie in (0, 1]")
    return np.exp(-np.log(lam) * np.asarray(levy.characteristic_exponent(theta)))
