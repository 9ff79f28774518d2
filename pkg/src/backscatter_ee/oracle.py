"""Brute-force references used to check the closed forms and the optimizer."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import DomainError
from .model import NetworkParams, SensingParams, ee_arrays
from .optimizer import _pf_at_target


@dataclass(frozen=True)
class GridSpec:
    """Uniform (tau, alpha, mu) grid; each axis has at least two points."""

    tau_points: int = 100
    alpha_points: int = 100
    mu_points: int = 10
    tau_bounds: tuple[float, float] = (1e-3, 1.0 - 1e-3)
    alpha_bounds: tuple[float, float] = (0.0, 1.0)
    mu_bounds: tuple[float, float] = (0.1, 1.0)

    def __post_init__(self):
        for name in ("tau_points", "alpha_points", "mu_points"):
            if int(getattr(self, name)) < 2:
                raise DomainError(f"{name} must be >= 2")
        (t0, t1), (a0, a1), (m0, m1) = self.tau_bounds, self.alpha_bounds, self.mu_bounds
        if not 0.0 < t0 <= t1 < 1.0:
            raise DomainError("tau_bounds must lie in (0, 1)")
        if not 0.0 <= a0 <= a1 <= 1.0:
            raise DomainError("alpha_bounds must lie in [0, 1]")
        if not 0.0 < m0 <= m1 <= 1.0:
            raise DomainError("mu_bounds must lie in (0, 1]")

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (np.linspace(*self.tau_bounds, self.tau_points),
                np.linspace(*self.alpha_bounds, self.alpha_points),
                np.linspace(*self.mu_bounds, self.mu_points))


@dataclass(frozen=True)
class GridResult:
    """Dense EE surface indexed [tau, alpha, mu]; cells with Pf above target are NaN."""

    taus: np.ndarray
    alphas: np.ndarray
    mus: np.ndarray
    surface: np.ndarray
    best_index: tuple[int, int, int] | None

    @property
    def valid(self) -> np.ndarray:
        return ~np.isnan(self.surface)

    @property
    def empty(self) -> bool:
        return self.best_index is None

    @property
    def best_ee(self) -> float:
        return math.nan if self.empty else float(self.surface[self.best_index])

    @property
    def best_point(self) -> tuple[float, float, float] | None:
        if self.empty:
            return None
        i, j, k = self.best_index
        return float(self.taus[i]), float(self.alphas[j]), float(self.mus[k])

    def resolution_bound(self) -> float:
        """Sum over axes of the largest EE change between the argmax and a valid neighbour."""
        if self.empty:
            return math.nan
        best = self.best_ee
        total = 0.0
        for axis in range(3):
            worst = 0.0
            for step in (-1, 1):
                idx = list(self.best_index)
                idx[axis] += step
                if 0 <= idx[axis] < self.surface.shape[axis]:
                    v = self.surface[tuple(idx)]
                    if not np.isnan(v):
                        worst = max(worst, abs(best - float(v)))
            total += worst
        return total

    def to_csv(self, stream=None) -> str:
        """Surface as CSV (tau, alpha, mu, ee) in index order; returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", "alpha", "mu", "ee"])
        for (i, j, k), v in np.ndenumerate(self.surface):
            w.writerow([repr(float(self.taus[i])), repr(float(self.alphas[j])),
                        repr(float(self.mus[k])), repr(float(v))])
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text


def grid_search_ee(n: NetworkParams, s_template: SensingParams, g: GridSpec = GridSpec(), *,
                   per_hz: bool = True) -> GridResult:
    """Exhaustive EE evaluation with the threshold set for the Pd target at every tau.

    Tau rows that violate the false-alarm target (or leave fewer than one
    sensing sample) are masked. ``best_index`` is None when no cell carries
    positive EE; ties resolve to the lowest flat index.
    """
    taus, alphas, mus = g.axes()
    ok = (1.0 - taus) * s_template.num_samples >= 1.0
    pf = np.where(ok, _pf_at_target(s_template, np.where(ok, taus, 0.5), n.target_pd), 1.0)
    rows = ok & (pf <= n.target_pf)
    surface = ee_arrays(n, pf[:, None, None], n.target_pd, taus[:, None, None],
                        alphas[None, :, None], mus[None, None, :], per_hz=per_hz)
    surface = np.where(rows[:, None, None], surface, np.nan)
    ranked = np.where(np.isnan(surface), -np.inf, surface)
    flat = int(np.argmax(ranked))
    best = None
    if ranked.flat[flat] > 0.0:
        best = tuple(int(v) for v in np.unravel_index(flat, surface.shape))
    return GridResult(taus, alphas, mus, surface, best)


class ProbeResult(NamedTuple):
    concave: bool
    max_second_difference: float


def concavity_probe(values) -> ProbeResult:
    """Check that uniformly spaced samples have no second difference above a small slack."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 3:
        raise DomainError("concavity_probe needs a 1-D sequence of at least 3 samples")
    if not np.all(np.isfinite(v)):
        raise DomainError("concavity_probe needs finite samples")
    d2 = v[2:] - 2.0 * v[1:-1] + v[:-2]
    worst = float(d2.max())
    slack = 1e-9 * float(np.abs(v).max())
    return ProbeResult(worst <= slack, worst)


def finite_difference(fn: Callable[[float], float], x: float, h: float | None = None) -> float:
    """Central difference (fn(x+h) - fn(x-h)) / 2h; h defaults to max(1e-8, 1e-6|x|).

    The divisor is the spacing of the points actually evaluated, so rounding
    of x +- h does not bias the slope.
    """
    if h is None:
        h = max(1e-8, 1e-6 * abs(x))
    hi, lo = x + h, x - h
    return (fn(hi) - fn(lo)) / (hi - lo)


def count_interior_maxima(values) -> int:
    """Number of strict local maxima of a 1-D or 2-D array away from its border, NaN-aware."""
    v = np.where(np.isnan(values), -np.inf, np.asarray(values, dtype=float))
    if v.ndim == 1:
        c = v[1:-1]
        return int(np.sum((c > v[:-2]) & (c > v[2:])))
    c = v[1:-1, 1:-1]
    mask = np.isfinite(c)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                nb = v[1 + di:v.shape[0] - 1 + di, 1 + dj:v.shape[1] - 1 + dj]
                mask &= c > nb
    return int(mask.sum())


__all__ = [
    "GridResult",
    "GridSpec",
    "ProbeResult",
    "concavity_probe",
    "count_interior_maxima",
    "finite_difference",
    "grid_search_ee",
]
