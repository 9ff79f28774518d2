"""Sensing statistics, scenario accounting, and energy efficiency.

All quantities live in a unit frame (T_fr = 1 s): powers in watts, energies
in joules, rates in bits/s, throughput in bits per frame. Functions accept
plain floats; the ``*_arrays`` helpers broadcast over numpy arrays and back
the grid oracle and the optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError
from .special import db_to_linear, q_function

LN2 = math.log(2.0)


def _check(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise DomainError(f"{name}: {msg}")


@dataclass(frozen=True)
class SensingParams:
    """Energy-detector configuration.

    ``snr`` is linear (not dB); ``threshold`` is the detection threshold in
    watts, on the same scale as ``noise_variance``.
    """

    num_samples: int = 2000
    snr: float = 0.1
    noise_variance: float = 1.0
    threshold: float = 1.0

    def __post_init__(self):
        _check(int(self.num_samples) == self.num_samples and self.num_samples >= 1,
               "num_samples", "must be an integer >= 1")
        _check(self.snr > 0, "snr", "must be > 0")
        _check(self.noise_variance > 0, "noise_variance", "must be > 0")
        _check(self.threshold > 0, "threshold", "must be > 0")

    @classmethod
    def from_db(cls, num_samples: int, snr_db: float, noise_variance: float = 1.0,
                threshold: float | None = None) -> "SensingParams":
        snr = db_to_linear(snr_db)
        if threshold is None:
            threshold = noise_variance * (1.0 + snr)
        return cls(num_samples, snr, noise_variance, threshold)

    def with_threshold(self, threshold: float) -> "SensingParams":
        return replace(self, threshold=threshold)


@dataclass(frozen=True)
class NetworkParams:
    """Powers, rates, priors and constraint targets of the PU/SU pair.

    Defaults reproduce the reference numerical setup; ``noise_to_channel_power``
    (N0/gc) is not given there and defaults to 1e-2 W.
    """

    prior_idle: float = 0.75
    prior_busy: float = 0.25
    bandwidth: float = 6e6
    backscatter_rate: float = 5e4
    partial_throughput_factor: float = 1.0
    sensing_power: float = 1e-3
    circuit_power: float = 1e-4
    pu_tx_power: float = 1.7e4
    interference_gain_ratio: float = 0.5e-3
    noise_to_channel_power: float = 1e-2
    harvested_power: float = 0.25
    target_pd: float = 0.9
    target_pf: float = 0.1

    def __post_init__(self):
        _check(0 < self.prior_idle < 1, "prior_idle", "must lie in (0, 1)")
        _check(0 < self.prior_busy < 1, "prior_busy", "must lie in (0, 1)")
        _check(abs(self.prior_idle + self.prior_busy - 1.0) <= 1e-12,
               "prior_busy", "priors must sum to 1")
        _check(self.bandwidth > 0, "bandwidth", "must be > 0")
        _check(self.backscatter_rate >= 0, "backscatter_rate", "must be >= 0")
        _check(0 <= self.partial_throughput_factor <= 1,
               "partial_throughput_factor", "must lie in [0, 1]")
        _check(self.sensing_power >= 0, "sensing_power", "must be >= 0")
        _check(self.circuit_power >= 0, "circuit_power", "must be >= 0")
        _check(self.pu_tx_power > 0, "pu_tx_power", "must be > 0")
        _check(self.interference_gain_ratio >= 0, "interference_gain_ratio", "must be >= 0")
        _check(self.noise_to_channel_power > 0, "noise_to_channel_power", "must be > 0")
        _check(self.harvested_power > 0, "harvested_power", "must be > 0")
        _check(0 < self.target_pd < 1, "target_pd", "must lie in (0, 1)")
        _check(0 < self.target_pf < 1, "target_pf", "must lie in (0, 1)")

    @property
    def interference_noise_power(self) -> float:
        """Effective noise seen by the SR when the PU is active: Z_I * P_T,PU + P0."""
        return self.interference_gain_ratio * self.pu_tx_power + self.noise_to_channel_power

    def replace(self, **changes) -> "NetworkParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class FriisParams:
    harvesting_efficiency: float = 0.6
    tx_gain: float = 10 ** 0.6
    rx_gain: float = 10 ** 0.6
    wavelength: float = 1.0
    distance: float = 2475.0

    def __post_init__(self):
        _check(0 <= self.harvesting_efficiency <= 1, "harvesting_efficiency", "must lie in [0, 1]")
        _check(self.tx_gain > 0, "tx_gain", "must be > 0")
        _check(self.rx_gain > 0, "rx_gain", "must be > 0")
        _check(self.wavelength > 0, "wavelength", "must be > 0")
        _check(self.distance > 0, "distance", "must be > 0")


@dataclass(frozen=True)
class TimeSplit:
    """Frame allocation: ``tau`` transmission share, ``alpha`` harvesting share of
    tau when busy, ``mu`` transmitting share of tau when idle."""

    tau: float
    alpha: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        _check(0 < self.tau < 1, "tau", "must lie in (0, 1)")
        _check(0 <= self.alpha <= 1, "alpha", "must lie in [0, 1]")
        _check(0 < self.mu <= 1, "mu", "must lie in (0, 1]")


@dataclass(frozen=True)
class EEBreakdown:
    """Average throughput, energy and efficiency at one operating point.

    With ``per_hz`` the throughput fields are divided by the bandwidth so that
    ``ee`` is in bits/Hz/J; otherwise they are bits and ``ee`` is bits/J.
    """

    pf: float
    pd: float
    throughput_abc: float
    throughput_htt: float
    energy: float
    ee: float
    htt_feasible: bool
    ptr: float
    per_hz: bool = True

    @property
    def throughput(self) -> float:
        return self.throughput_abc + self.throughput_htt

    @property
    def ee_abc(self) -> float:
        return _ratio(self.throughput_abc, self.energy)

    @property
    def ee_htt(self) -> float:
        return _ratio(self.throughput_htt, self.energy)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out.update(ee_abc=self.ee_abc, ee_htt=self.ee_htt)
        return out


class ScenarioRow(NamedTuple):
    label: str
    probability: float
    throughput: float
    energy: float


def _ratio(num, den):
    if den > 0:
        return num / den
    return math.inf if num > 0 else 0.0


# --- sensing ---------------------------------------------------------------

def _check_tau(tau) -> None:
    if not np.all((np.asarray(tau) > 0) & (np.asarray(tau) < 1)):
        raise DomainError("tau must lie in (0, 1)")


def prob_false_alarm(s: SensingParams, tau):
    _check_tau(tau)
    m = (1.0 - np.asarray(tau, dtype=float)) * s.num_samples
    return q_function((s.threshold / s.noise_variance - 1.0) * np.sqrt(m))


def prob_detection(s: SensingParams, tau):
    _check_tau(tau)
    m = (1.0 - np.asarray(tau, dtype=float)) * s.num_samples
    g = s.snr
    return q_function((s.threshold / s.noise_variance - g - 1.0) * np.sqrt(m / (2.0 * g + 1.0)))


def friis_harvested_power(f: FriisParams, pu_tx_power: float) -> float:
    """Harvested RF power delta * P_T * G_T * G_R * lambda^2 / (4 pi d)^2."""
    _check(pu_tx_power > 0, "pu_tx_power", "must be > 0")
    return (f.harvesting_efficiency * pu_tx_power * f.tx_gain * f.rx_gain
            * f.wavelength ** 2 / (4.0 * math.pi * f.distance) ** 2)


def friis_wavelength(target_power: float, pu_tx_power: float, *, harvesting_efficiency: float,
                     tx_gain: float, rx_gain: float, distance: float) -> float:
    """Wavelength at which the Friis link delivers ``target_power``."""
    _check(target_power > 0, "target_power", "must be > 0")
    _check(harvesting_efficiency > 0, "harvesting_efficiency", "must be > 0")
    return 4.0 * math.pi * distance * math.sqrt(
        target_power / (harvesting_efficiency * pu_tx_power * tx_gain * rx_gain))


# --- energy budget ---------------------------------------------------------

def alpha_dagger_arrays(n: NetworkParams, tau, mu):
    return (mu * tau * n.circuit_power + n.sensing_power * (1.0 - tau)) / (tau * n.harvested_power)


def transmit_power_arrays(n: NetworkParams, tau, alpha, mu):
    return (alpha * tau * n.harvested_power - n.sensing_power * (1.0 - tau)
            - mu * tau * n.circuit_power) / (mu * tau)


def alpha_dagger(n: NetworkParams, t: TimeSplit) -> float:
    """Smallest harvesting share covering sensing plus circuit energy.

    A value above 1 means harvest-then-transmit cannot run at this split.
    """
    return float(alpha_dagger_arrays(n, t.tau, t.mu))


def transmit_power(n: NetworkParams, t: TimeSplit) -> float:
    """ST transmit power funded by the harvest; negative exactly when alpha < alpha_dagger."""
    return float(transmit_power_arrays(n, t.tau, t.alpha, t.mu))


# --- scenario accounting ---------------------------------------------------

class Evaluation(NamedTuple):
    throughput_abc: np.ndarray
    throughput_htt: np.ndarray
    energy: np.ndarray
    ptr: np.ndarray
    feasible: np.ndarray


def evaluate_arrays(n: NetworkParams, pf, pd, tau, alpha, mu) -> Evaluation:
    """Average throughput (bits) and energy (J), broadcasting over array inputs.

    HTT throughput and transmit energy are zeroed where alpha < alpha_dagger.
    """
    tau, alpha, mu = (np.asarray(v, dtype=float) for v in (tau, alpha, mu))
    pf = np.asarray(pf, dtype=float)
    pd = np.asarray(pd, dtype=float)
    p0, p1 = n.prior_idle, n.prior_busy
    ptr = transmit_power_arrays(n, tau, alpha, mu)
    feasible = alpha >= alpha_dagger_arrays(n, tau, mu)
    x = np.where(feasible, np.maximum(ptr, 0.0), 0.0)
    r_abc = p1 * pd * (1.0 - alpha) * tau * n.backscatter_rate
    rate_busy = np.log1p(x / n.interference_noise_power) / LN2
    rate_idle = np.log1p(x / n.noise_to_channel_power) / LN2
    r_htt = mu * tau * n.bandwidth * (n.partial_throughput_factor * p1 * (1.0 - pd) * rate_busy
                                      + p0 * (1.0 - pf) * rate_idle)
    tx_prob = p1 * (1.0 - pd) + p0 * (1.0 - pf)
    energy = n.sensing_power * (1.0 - tau) + mu * tau * x * tx_prob
    return Evaluation(*np.broadcast_arrays(r_abc, r_htt, energy, ptr, feasible))


def ee_arrays(n: NetworkParams, pf, pd, tau, alpha, mu, per_hz: bool = True):
    ev = evaluate_arrays(n, pf, pd, tau, alpha, mu)
    total = ev.throughput_abc + ev.throughput_htt
    if per_hz:
        total = total / n.bandwidth
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(ev.energy > 0, total / np.where(ev.energy > 0, ev.energy, 1.0),
                       np.where(total > 0, np.inf, 0.0))
    return out


def _sensing_probs(s: SensingParams, tau: float) -> tuple[float, float]:
    return float(prob_false_alarm(s, tau)), float(prob_detection(s, tau))


def scenario_table(n: NetworkParams, s: SensingParams, t: TimeSplit) -> tuple[ScenarioRow, ...]:
    """Probability, throughput (bits) and energy (J) of the four sensing outcomes.

    S1 busy/declared busy, S2 idle/declared busy, S3 busy/declared idle,
    S4 idle/declared idle.
    """
    pf, pd = _sensing_probs(s, t.tau)
    tau, alpha, mu = t.tau, t.alpha, t.mu
    sense = n.sensing_power * (1.0 - tau)
    ptr = transmit_power(n, t)
    if alpha >= alpha_dagger(n, t):
        x = max(ptr, 0.0)
        r3 = (n.partial_throughput_factor * mu * tau * n.bandwidth
              * math.log1p(x / n.interference_noise_power) / LN2)
        r4 = mu * tau * n.bandwidth * math.log1p(x / n.noise_to_channel_power) / LN2
        e_tx = x * mu * tau
    else:
        r3 = r4 = e_tx = 0.0
    p0, p1 = n.prior_idle, n.prior_busy
    return (
        ScenarioRow("S1", p1 * pd, (1.0 - alpha) * tau * n.backscatter_rate, sense),
        ScenarioRow("S2", p0 * pf, 0.0, sense),
        ScenarioRow("S3", p1 * (1.0 - pd), r3, sense + e_tx),
        ScenarioRow("S4", p0 * (1.0 - pf), r4, sense + e_tx),
    )


def avg_throughput(n: NetworkParams, s: SensingParams, t: TimeSplit) -> tuple[float, float]:
    """(ABC throughput, HTT throughput) in bits per frame."""
    pf, pd = _sensing_probs(s, t.tau)
    ev = evaluate_arrays(n, pf, pd, t.tau, t.alpha, t.mu)
    return float(ev.throughput_abc), float(ev.throughput_htt)


def avg_energy(n: NetworkParams, s: SensingParams, t: TimeSplit) -> float:
    pf, pd = _sensing_probs(s, t.tau)
    return float(evaluate_arrays(n, pf, pd, t.tau, t.alpha, t.mu).energy)


def breakdown_from_probs(n: NetworkParams, pf: float, pd: float, t: TimeSplit,
                         per_hz: bool = True) -> EEBreakdown:
    ev = evaluate_arrays(n, pf, pd, t.tau, t.alpha, t.mu)
    scale = 1.0 / n.bandwidth if per_hz else 1.0
    r_abc = float(ev.throughput_abc) * scale
    r_htt = float(ev.throughput_htt) * scale
    energy = float(ev.energy)
    return EEBreakdown(pf=float(pf), pd=float(pd), throughput_abc=r_abc, throughput_htt=r_htt,
                       energy=energy, ee=_ratio(r_abc + r_htt, energy),
                       htt_feasible=bool(ev.feasible), ptr=float(ev.ptr), per_hz=per_hz)


def energy_efficiency(n: NetworkParams, s: SensingParams, t: TimeSplit,
                      per_hz: bool = True) -> EEBreakdown:
    """Energy efficiency (throughput over energy) with its ABC/HTT decomposition."""
    pf, pd = _sensing_probs(s, t.tau)
    return breakdown_from_probs(n, pf, pd, t, per_hz=per_hz)
