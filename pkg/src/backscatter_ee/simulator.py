"""Frame-level Monte-Carlo realization of the sensing and scenario model.

Each frame draws the PU state, forms an energy-detector statistic, compares
it to the threshold and books that scenario's throughput and energy. Frames
are generated in fixed-size blocks, each from its own child seed, so any
number of workers reproduces the serial result exactly.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import DomainError, ResourceError
from .model import NetworkParams, SensingParams, TimeSplit, _ratio, scenario_table

DETECTOR_MODELS = ("gaussian_approx", "exact_chi_square")
MAX_FRAMES = 2 ** 40
BLOCK_SIZE = 1 << 18


@dataclass(frozen=True)
class SimConfig:
    num_frames: int
    seed: int = 0
    detector_model: str = "gaussian_approx"
    workers: int = 1
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if int(self.num_frames) != self.num_frames or self.num_frames < 1:
            raise DomainError("num_frames must be an integer >= 1")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.detector_model not in DETECTOR_MODELS:
            raise DomainError(f"detector_model must be one of {DETECTOR_MODELS}")
        if self.workers < 1 or self.block_size < 1:
            raise DomainError("workers and block_size must be >= 1")


@dataclass(frozen=True)
class SimResult:
    """Empirical averages; throughput is per Hz when ``per_hz`` is set."""

    empirical_pf: float
    empirical_pd: float
    mean_throughput: float
    mean_energy: float
    empirical_ee: float
    standard_errors: dict
    scenario_counts: tuple[int, int, int, int]
    num_frames: int
    seed: int
    detector_model: str
    per_hz: bool = True

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["scenario_counts"] = list(self.scenario_counts)
        out["standard_errors"] = dict(self.standard_errors)
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def detector_statistic_moments(s: SensingParams, tau: float, hypothesis) -> tuple[float, float]:
    """Mean and variance of the detector statistic under H0 (0) or H1 (1)."""
    if not 0.0 < tau < 1.0:
        raise DomainError("tau must lie in (0, 1)")
    h = {0: 0, 1: 1, "H0": 0, "H1": 1}.get(hypothesis)
    if h is None:
        raise DomainError("hypothesis must be 0, 1, 'H0' or 'H1'")
    m = (1.0 - tau) * s.num_samples
    var0 = s.noise_variance ** 2
    if h == 0:
        return s.noise_variance, var0 / m
    return s.noise_variance * (1.0 + s.snr), var0 * (2.0 * s.snr + 1.0) / m


def exact_false_alarm(s: SensingParams, tau: float) -> float:
    """Pf when the H0 statistic is a scaled chi-square with 2(1-tau)Ns degrees of freedom."""
    m = (1.0 - tau) * s.num_samples
    return float(stats.gamma.sf(s.threshold / s.noise_variance, a=m, scale=1.0 / m))


def _block_counts(s: SensingParams, tau: float, prior_busy: float, c: SimConfig, block: int,
                  size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(c.seed, spawn_key=(block,))))
    busy = rng.random(size) < prior_busy
    if c.detector_model == "gaussian_approx":
        m0, v0 = detector_statistic_moments(s, tau, 0)
        m1, v1 = detector_statistic_moments(s, tau, 1)
        z = rng.standard_normal(size)
        stat = np.where(busy, m1 + math.sqrt(v1) * z, m0 + math.sqrt(v0) * z)
    else:
        # mean of M complex noise samples: sigma^2 * Gamma(M, 1/M), times (1 + snr) under H1
        m = (1.0 - tau) * s.num_samples
        stat = s.noise_variance * rng.gamma(m, 1.0 / m, size)
        stat = np.where(busy, stat * (1.0 + s.snr), stat)
    declared = stat > s.threshold
    return np.array([np.count_nonzero(busy & declared), np.count_nonzero(~busy & declared),
                     np.count_nonzero(busy & ~declared), np.count_nonzero(~busy & ~declared)],
                    dtype=np.int64)


def simulate(n: NetworkParams, s: SensingParams, t: TimeSplit, c: SimConfig, *,
             per_hz: bool = True) -> SimResult:
    """Simulate ``c.num_frames`` frames; bit-identical for equal inputs and seed."""
    if c.num_frames > MAX_FRAMES:
        raise ResourceError(f"num_frames = {c.num_frames} exceeds the limit of {MAX_FRAMES}")
    nblocks = -(-c.num_frames // c.block_size)
    sizes = [min(c.block_size, c.num_frames - k * c.block_size) for k in range(nblocks)]

    def run(k: int) -> np.ndarray:
        return _block_counts(s, t.tau, n.prior_busy, c, k, sizes[k])

    if c.workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=c.workers) as pool:
            parts = list(pool.map(run, range(nblocks)))
    else:
        parts = [run(k) for k in range(nblocks)]
    counts = np.sum(parts, axis=0, dtype=np.int64)
    return _aggregate(n, s, t, c, counts, per_hz)


def _binomial(hits: int, total: int) -> tuple[float, float]:
    if total == 0:
        return math.nan, math.nan
    p = hits / total
    return p, math.sqrt(p * (1.0 - p) / total)


def _aggregate(n, s, t, c, counts, per_hz) -> SimResult:
    rows = scenario_table(n, s, t)
    scale = 1.0 / n.bandwidth if per_hz else 1.0
    r = np.array([row.throughput for row in rows]) * scale
    e = np.array([row.energy for row in rows])
    total = int(counts.sum())
    freq = counts / total
    mean_r = float(freq @ r)
    mean_e = float(freq @ e)
    ee = _ratio(mean_r, mean_e)
    pf, se_pf = _binomial(int(counts[1]), int(counts[1] + counts[3]))
    pd, se_pd = _binomial(int(counts[0]), int(counts[0] + counts[2]))
    var_r = float(freq @ (r - mean_r) ** 2)
    var_e = float(freq @ (e - mean_e) ** 2)
    cov = float(freq @ ((r - mean_r) * (e - mean_e)))
    if mean_e > 0:
        var_ee = (var_r - 2.0 * ee * cov + ee * ee * var_e) / (mean_e ** 2 * total)
        se_ee = math.sqrt(max(var_ee, 0.0))
    else:
        se_ee = math.nan
    ses = {"pf": se_pf, "pd": se_pd, "throughput": math.sqrt(var_r / total),
           "energy": math.sqrt(var_e / total), "ee": se_ee}
    return SimResult(empirical_pf=pf, empirical_pd=pd, mean_throughput=mean_r, mean_energy=mean_e,
                     empirical_ee=ee, standard_errors=ses,
                     scenario_counts=tuple(int(v) for v in counts), num_frames=total,
                     seed=int(c.seed), detector_model=c.detector_model, per_hz=per_hz)


def scenario_chi_square(result: SimResult, n: NetworkParams, s: SensingParams,
                        t: TimeSplit) -> tuple[float, float]:
    """Chi-square (statistic, p-value) of scenario counts against the analytic probabilities."""
    probs = np.array([row.probability for row in scenario_table(n, s, t)])
    expected = probs / probs.sum() * result.num_frames
    res = stats.chisquare(np.asarray(result.scenario_counts, dtype=float), expected)
    return float(res.statistic), float(res.pvalue)


__all__ = [
    "DETECTOR_MODELS",
    "SimConfig",
    "SimResult",
    "detector_statistic_moments",
    "exact_false_alarm",
    "scenario_chi_square",
    "simulate",
]
