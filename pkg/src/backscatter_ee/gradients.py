"""Analytic first derivatives of the sensing probabilities and of EE in alpha."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import DomainError
from .model import (
    LN2,
    NetworkParams,
    SensingParams,
    TimeSplit,
    alpha_dagger,
    evaluate_arrays,
    prob_detection,
    prob_false_alarm,
    transmit_power,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class GradientBundle:
    dpf_deps: float
    dpd_deps: float
    dpf_dtau: float
    dee_dalpha: float


def _samples(s: SensingParams, tau: float) -> float:
    if not 0.0 < tau < 1.0:
        raise DomainError("tau must lie in (0, 1)")
    return (1.0 - tau) * s.num_samples


def dpf_deps(s: SensingParams, tau: float) -> float:
    m = _samples(s, tau)
    z = s.threshold / s.noise_variance - 1.0
    return -math.exp(-0.5 * m * z * z) * math.sqrt(m) / (_SQRT_2PI * s.noise_variance)


def dpd_deps(s: SensingParams, tau: float) -> float:
    m = _samples(s, tau)
    k = 2.0 * s.snr + 1.0
    z = s.threshold / s.noise_variance - s.snr - 1.0
    return -math.exp(-0.5 * m * z * z / k) * math.sqrt(m / k) / (_SQRT_2PI * s.noise_variance)


def dpf_dtau(s: SensingParams, tau: float) -> float:
    """Derivative of the false-alarm probability in tau at a fixed threshold.

    Diverges as tau -> 1, so tau above 1 - 1e-6 is rejected.
    """
    if not 0.0 < tau <= 1.0 - 1e-6:
        raise DomainError("dpf_dtau requires 0 < tau <= 1 - 1e-6")
    m = (1.0 - tau) * s.num_samples
    z = s.threshold / s.noise_variance - 1.0
    return z * s.num_samples * math.exp(-0.5 * m * z * z) / (2.0 * _SQRT_2PI * math.sqrt(m))


def dee_dalpha(n: NetworkParams, s: SensingParams, t: TimeSplit, *,
               fixed_energy: bool = False, per_hz: bool = True) -> float:
    """Derivative of EE with respect to the harvesting share alpha on [alpha_dagger, 1].

    The HTT log terms are written as ``log2(y1 + alpha*y2)`` (PU active) and
    ``log2(y3 + alpha*y4)`` (PU idle). With ``fixed_energy`` the average energy
    is held constant, giving the three-term surrogate; otherwise the
    alpha-dependence of the transmit energy is included and the result is the
    exact derivative of :func:`energy_efficiency`.
    """
    a_dag = alpha_dagger(n, t)
    if not a_dag <= t.alpha <= 1.0:
        raise DomainError(f"alpha={t.alpha} outside [alpha_dagger={a_dag}, 1]")
    pf = float(prob_false_alarm(s, t.tau))
    pd = float(prob_detection(s, t.tau))
    return dee_dalpha_from_probs(n, pf, pd, t.tau, t.alpha, t.mu,
                                 fixed_energy=fixed_energy, per_hz=per_hz)


def dee_dalpha_from_probs(n: NetworkParams, pf: float, pd: float, tau: float, alpha: float,
                          mu: float, *, fixed_energy: bool = False, per_hz: bool = True) -> float:
    """:func:`dee_dalpha` for given sensing probabilities; no domain checks."""
    p0, p1 = n.prior_idle, n.prior_busy
    sense = n.sensing_power * (1.0 - tau)
    nb, ni = n.interference_noise_power, n.noise_to_channel_power
    y1 = 1.0 - n.circuit_power / nb - sense / (nb * tau * mu)
    y2 = n.harvested_power / (nb * mu)
    y3 = 1.0 - n.circuit_power / ni - sense / (ni * tau * mu)
    y4 = n.harvested_power / (ni * mu)
    scale = 1.0 / n.bandwidth if per_hz else 1.0
    c = mu * tau * n.bandwidth / LN2
    slope = scale * (n.partial_throughput_factor * p1 * (1.0 - pd) * c * y2 / (y1 + alpha * y2)
                     - p1 * pd * tau * n.backscatter_rate
                     + p0 * (1.0 - pf) * c * y4 / (y3 + alpha * y4))
    q = p1 * (1.0 - pd) + p0 * (1.0 - pf)
    x = max(alpha * tau * n.harvested_power - sense - mu * tau * n.circuit_power, 0.0) / (mu * tau)
    energy = sense + mu * tau * x * q
    if fixed_energy:
        return slope / energy
    rate = (p1 * pd * (1.0 - alpha) * tau * n.backscatter_rate
            + c * (n.partial_throughput_factor * p1 * (1.0 - pd) * math.log1p(x / nb)
                   + p0 * (1.0 - pf) * math.log1p(x / ni)))
    ee = scale * rate / energy
    return (slope - ee * tau * n.harvested_power * q) / energy


def threshold_monotonicity_condition(n: NetworkParams, s: SensingParams, t: TimeSplit) -> bool:
    """Sufficient condition under which EE is non-decreasing in the threshold.

    Checks ``W*kappa*ln(1 + Ptr/P0) >= (1-alpha)*B_b/(E*mu) + Ptr*R/E**2`` with R
    and E the raw (bits, joules) averages at the given point.
    """
    pf = float(prob_false_alarm(s, t.tau))
    pd = float(prob_detection(s, t.tau))
    ev = evaluate_arrays(n, pf, pd, t.tau, t.alpha, t.mu)
    energy = float(ev.energy)
    rate = float(ev.throughput_abc + ev.throughput_htt)
    ptr = max(transmit_power(n, t), 0.0) if bool(ev.feasible) else 0.0
    lhs = n.bandwidth * n.partial_throughput_factor * math.log1p(ptr / n.noise_to_channel_power)
    rhs = (1.0 - t.alpha) * n.backscatter_rate / (energy * t.mu) + ptr * rate / energy ** 2
    return bool(lhs >= rhs)


def gradient_bundle(n: NetworkParams, s: SensingParams, t: TimeSplit, *,
                    per_hz: bool = True) -> GradientBundle:
    return GradientBundle(
        dpf_deps=dpf_deps(s, t.tau),
        dpd_deps=dpd_deps(s, t.tau),
        dpf_dtau=dpf_dtau(s, t.tau),
        dee_dalpha=dee_dalpha(n, s, t, per_hz=per_hz),
    )


__all__ = [
    "GradientBundle",
    "dee_dalpha",
    "dee_dalpha_from_probs",
    "dpd_deps",
    "dpf_deps",
    "dpf_dtau",
    "gradient_bundle",
    "threshold_monotonicity_condition",
]
