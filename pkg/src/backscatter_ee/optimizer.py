"""Sequential optimizer: threshold, transmit share mu, harvest share alpha, then tau.

For every candidate tau the threshold is re-derived so that Pd sits exactly at
the target, alpha is re-optimized on [alpha_dagger, 1], and tau is found by a
derivative-free golden-section search inside the interval where the
false-alarm constraint holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import lambertw

from .exceptions import DegenerateSensingError, DomainError, InfeasibleError
from .gradients import dee_dalpha_from_probs
from .model import (
    LN2,
    NetworkParams,
    SensingParams,
    TimeSplit,
    alpha_dagger_arrays,
    breakdown_from_probs,
    ee_arrays,
    evaluate_arrays,
    prob_detection,
    prob_false_alarm,
)
from .special import q_function, q_inverse

MODES = ("hybrid", "abc_only", "htt_only")
TAU_MIN = 1e-3
TAU_MAX = 1.0 - 1e-3
TIE_TOL = 1e-12
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimalPoint:
    """Optimized operating point. ``eps_star`` is None under perfect sensing."""

    eps_star: float | None
    mu_star: float
    alpha_star: float
    tau_star: float
    ee_max: float
    mode: str
    pf: float
    pd: float
    throughput: float
    energy: float
    alpha_clamped: bool = False
    non_concave: bool = False
    per_hz: bool = True

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class BbWindow:
    lower: float
    upper: float

    def contains(self, rate: float) -> bool:
        return self.lower < rate < self.upper


@dataclass(frozen=True)
class AlphaSolution:
    alpha: float
    clamped: bool
    method: str  # "lambert", "brentq" or "endpoint"


@dataclass(frozen=True)
class TauSearchResult:
    tau: float
    ee: float
    alpha: float
    bounds: tuple[float, float]
    non_concave: bool = False
    alpha_clamped: bool = False
    scan: np.ndarray = field(default=None, repr=False, compare=False)


# --- threshold and constraint ------------------------------------------------

def optimal_threshold(s: SensingParams, tau: float, target_pd: float) -> float:
    """Threshold that puts the detection probability exactly at ``target_pd``."""
    if not 0.0 < target_pd < 1.0:
        raise DomainError("target_pd must lie in (0, 1)")
    if not 0.0 < tau < 1.0:
        raise DomainError("tau must lie in (0, 1)")
    m = (1.0 - tau) * s.num_samples
    if m < 1.0:
        raise DegenerateSensingError(f"(1 - tau) * Ns = {m} < 1 sample")
    g = s.snr
    return s.noise_variance * ((g + 1.0) + math.sqrt((2.0 * g + 1.0) / m) * q_inverse(target_pd))


def _pf_at_target(s: SensingParams, tau, target_pd: float):
    """False-alarm probability with the threshold pinned at the Pd target."""
    m = (1.0 - np.asarray(tau, dtype=float)) * s.num_samples
    g = s.snr
    return q_function(g * np.sqrt(m) + math.sqrt(2.0 * g + 1.0) * q_inverse(target_pd))


def check_pf_constraint(n: NetworkParams, s: SensingParams, tau: float) -> bool:
    """True iff the false-alarm probability at the current threshold is within target."""
    return bool(prob_false_alarm(s, tau) <= n.target_pf)


def pf_tau_limit(n: NetworkParams, s: SensingParams) -> float:
    """Largest tau for which Pf <= target when Pd is held at its target (1.0 if unbounded)."""
    g = s.snr
    s_req = (q_inverse(n.target_pf) - math.sqrt(2.0 * g + 1.0) * q_inverse(n.target_pd)) / g
    if s_req <= 0.0:
        return 1.0
    return 1.0 - s_req * s_req / s.num_samples


def htt_onset(n: NetworkParams, mu: float = 1.0) -> float:
    """Smallest tau at which alpha_dagger <= 1 (inf if HTT can never be funded)."""
    den = n.harvested_power - mu * n.circuit_power + n.sensing_power
    if den <= 0.0:
        return math.inf
    return n.sensing_power / den


def feasible_tau_interval(n: NetworkParams, s: SensingParams, *, mu: float = 1.0,
                          hybrid: bool = True, sensing_errors: bool = True) -> tuple[float, float]:
    """Closed tau bracket satisfying the sensing and (for hybrid) energy constraints."""
    # at least one sensing sample is kept even when sensing is assumed perfect
    lo, hi = TAU_MIN, min(TAU_MAX, 1.0 - 1.0 / s.num_samples)
    if sensing_errors:
        hi = min(hi, pf_tau_limit(n, s))
        step = math.ulp(hi) if hi > 0 else 0.0
        while hi > lo and _pf_at_target(s, hi, n.target_pd) > n.target_pf:
            hi -= step
            step *= 2.0
    if hybrid:
        onset = htt_onset(n, mu)
        if not math.isfinite(onset):
            raise InfeasibleError("harvested power cannot cover circuit power")
        lo = max(lo, onset)
        step = math.ulp(lo)
        while lo < hi and alpha_dagger_arrays(n, lo, mu) > 1.0:
            lo += step
            step *= 2.0
    if lo > hi:
        raise InfeasibleError(
            f"no tau satisfies the constraints (interval [{lo:.6g}, {hi:.6g}] is empty)")
    return lo, hi


def optimal_mu(n: NetworkParams, s: SensingParams, t: TimeSplit) -> float:
    """Full transmit share is optimal whenever HTT is feasible; 1 is returned regardless."""
    return 1.0


# --- alpha ---------------------------------------------------------------------

def _operating_probs(n: NetworkParams, s: SensingParams, tau: float,
                     sensing_errors: bool) -> tuple[float | None, float, float]:
    if not sensing_errors:
        return None, 0.0, 1.0
    eps = optimal_threshold(s, tau, n.target_pd)
    pf = float(_pf_at_target(s, tau, n.target_pd))
    return eps, pf, n.target_pd


def _break_even_rate(n: NetworkParams, pf: float, pd: float, tau: float, mu: float,
                     alpha: float) -> float:
    """Backscatter rate at which dEE/dalpha vanishes at ``alpha`` (bits/s)."""
    ev = evaluate_arrays(n, pf, pd, tau, alpha, mu)
    x = max(float(ev.ptr), 0.0)
    p0, p1 = n.prior_idle, n.prior_busy
    q = p1 * (1.0 - pd) + p0 * (1.0 - pf)
    d_htt = tau * n.bandwidth * n.harvested_power / LN2 * (
        n.partial_throughput_factor * p1 * (1.0 - pd) / (n.interference_noise_power + x)
        + p0 * (1.0 - pf) / (n.noise_to_channel_power + x))
    d_energy = tau * n.harvested_power * q
    energy_full = float(evaluate_arrays(n, pf, pd, tau, 1.0, mu).energy)
    num = d_htt * float(ev.energy) - float(ev.throughput_htt) * d_energy
    return num / (p1 * pd * tau * energy_full)


def _bb_window(n: NetworkParams, pf: float, pd: float, tau: float, mu: float) -> BbWindow:
    a_dag = float(alpha_dagger_arrays(n, tau, mu))
    if a_dag > 1.0:
        raise InfeasibleError(f"alpha_dagger = {a_dag:.6g} > 1 at tau = {tau:.6g}")
    return BbWindow(lower=_break_even_rate(n, pf, pd, tau, mu, 1.0),
                    upper=_break_even_rate(n, pf, pd, tau, mu, a_dag))


def bb_window(n: NetworkParams, s: SensingParams, t: TimeSplit) -> BbWindow:
    """Backscatter-rate window inside which the optimal alpha is interior.

    Below ``lower`` EE still rises at alpha = 1; above ``upper`` it already
    falls at alpha_dagger. Both bounds are proportional to the bandwidth.
    """
    pf, pd = float(prob_false_alarm(s, t.tau)), float(prob_detection(s, t.tau))
    return _bb_window(n, pf, pd, t.tau, t.mu)


def _log_lambert_w(log_z: float) -> float:
    """Principal-branch W(exp(log_z)) without overflowing exp."""
    if log_z < 500.0:
        w = lambertw(math.exp(log_z)).real
        return float(w)
    w = log_z - math.log(log_z)
    for _ in range(50):
        step = (w + math.log(w) - log_z) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 1e-15 * abs(w):
            break
    return w


def _lambert_alpha(n: NetworkParams, pf: float, pd: float, tau: float, mu: float,
                   a_dag: float) -> float | None:
    """Stationary alpha for Z_I = 0 via the Lambert W function, or None if no real root."""
    p0, p1 = n.prior_idle, n.prior_busy
    noise = n.noise_to_channel_power
    c = n.partial_throughput_factor * p1 * (1.0 - pd) + p0 * (1.0 - pf)
    q = p1 * (1.0 - pd) + p0 * (1.0 - pf)
    abc = p1 * pd * tau * n.backscatter_rate
    a = abc * (1.0 - a_dag)
    b = abc * mu / n.harvested_power
    g = mu * tau * n.bandwidth * c / LN2
    e0 = n.sensing_power * (1.0 - tau)
    h = mu * tau * q
    if g <= 0.0 or h <= 0.0:
        return None
    k = 1.0 - (b * e0 + h * a) / (h * g)
    d = e0 / (h * noise) - 1.0
    if d == 0.0:
        w = 0.0
    elif d > 0.0:
        w = _log_lambert_w(math.log(d) - k)
    else:
        arg = d * math.exp(-k)
        if arg < -1.0 / math.e:
            return None
        w = float(lambertw(arg).real)
    x = noise * math.expm1(k + w)
    return a_dag + mu * x / n.harvested_power


def _optimal_alpha(n: NetworkParams, pf: float, pd: float, tau: float, mu: float,
                   per_hz: bool = True) -> AlphaSolution:
    a_dag = float(alpha_dagger_arrays(n, tau, mu))
    if a_dag > 1.0:
        raise InfeasibleError(f"alpha_dagger = {a_dag:.6g} > 1 at tau = {tau:.6g}")

    def deriv(al):
        return dee_dalpha_from_probs(n, pf, pd, tau, al, mu, per_hz=per_hz)

    d_lo, d_hi = deriv(a_dag), deriv(1.0)
    if not (d_lo > 0.0 and d_hi < 0.0):
        ee = ee_arrays(n, pf, pd, tau, np.array([a_dag, 1.0]), mu, per_hz=per_hz)
        # quasi-concavity: the better endpoint is the constrained optimum
        alpha = 1.0 if ee[1] > ee[0] else a_dag
        return AlphaSolution(alpha, True, "endpoint")
    if n.interference_gain_ratio == 0.0:
        alpha = _lambert_alpha(n, pf, pd, tau, mu, a_dag)
        if alpha is not None and a_dag <= alpha <= 1.0:
            return AlphaSolution(alpha, False, "lambert")
    alpha = brentq(deriv, a_dag, 1.0, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    return AlphaSolution(float(alpha), False, "brentq")


def optimal_alpha(n: NetworkParams, s: SensingParams, t: TimeSplit, *,
                  per_hz: bool = True) -> AlphaSolution:
    """EE-maximizing harvest share on [alpha_dagger, 1] at the current threshold.

    With no interference the stationary point has a closed form in the Lambert
    W function; with interference a bracketed root search on the exact
    derivative is used. When the derivative does not change sign on the
    interval the better endpoint is returned with ``clamped`` set.
    """
    pf, pd = float(prob_false_alarm(s, t.tau)), float(prob_detection(s, t.tau))
    return _optimal_alpha(n, pf, pd, t.tau, t.mu, per_hz=per_hz)


# --- tau -----------------------------------------------------------------------

def golden_section_max(fn: Callable[[float], float], lo: float, hi: float,
                       tol: float = 1e-6) -> tuple[float, float]:
    """Maximize a unimodal function on [lo, hi] down to a bracket of width ``tol``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


AlphaRule = Union[str, Callable[[float, float, float], float]]


def _tau_objective(n: NetworkParams, s: SensingParams, alpha_rule: AlphaRule, mu: float,
                   sensing_errors: bool, per_hz: bool):
    def solve(tau: float) -> tuple[float, float, bool]:
        _, pf, pd = _operating_probs(n, s, tau, sensing_errors)
        clamped = False
        if alpha_rule == "optimal":
            sol = _optimal_alpha(n, pf, pd, tau, mu, per_hz=per_hz)
            alpha, clamped = sol.alpha, sol.clamped
        elif alpha_rule == "abc_only":
            alpha = 0.0
        else:
            alpha = float(alpha_rule(tau, pf, pd))
        return float(ee_arrays(n, pf, pd, tau, alpha, mu, per_hz=per_hz)), alpha, clamped

    return solve


def optimal_tau(n: NetworkParams, s_template: SensingParams, alpha_rule: AlphaRule = "optimal",
                mu_star: float = 1.0, *, sensing_errors: bool = True, per_hz: bool = True,
                bounds: tuple[float, float] | None = None, tol: float = 1e-6,
                scan_points: int = 64) -> TauSearchResult:
    """Golden-section search for tau with threshold and alpha re-derived per candidate.

    ``alpha_rule`` is ``"optimal"`` (alpha* on [alpha_dagger, 1]), ``"abc_only"``
    (alpha = 0) or a callable ``(tau, pf, pd) -> alpha``. A pre-scan detects
    multiple interior maxima; in that case the search is restricted to the
    neighbourhood of the scan argmax and ``non_concave`` is set.
    """
    solve = _tau_objective(n, s_template, alpha_rule, mu_star, sensing_errors, per_hz)
    if bounds is None:
        bounds = feasible_tau_interval(n, s_template, mu=mu_star,
                                       hybrid=alpha_rule == "optimal",
                                       sensing_errors=sensing_errors)
    lo, hi = bounds

    def objective(tau: float) -> float:
        return solve(tau)[0]

    grid = np.linspace(lo, hi, scan_points)
    scan = np.array([objective(x) for x in grid])
    interior = (scan[1:-1] > scan[:-2]) & (scan[1:-1] > scan[2:])
    non_concave = int(interior.sum()) > 1
    k = int(np.argmax(scan))
    if non_concave:
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, scan_points - 1)]
    else:
        a, b = lo, hi
    best_tau, best_ee = golden_section_max(objective, a, b, tol=tol) if b > a else (lo, scan[0])
    for cand, val in ((lo, scan[0]), (hi, scan[-1]), (grid[k], scan[k])):
        if val > best_ee:
            best_tau, best_ee = float(cand), float(val)
    ee, alpha, clamped = solve(best_tau)
    return TauSearchResult(tau=float(best_tau), ee=ee, alpha=alpha, bounds=(lo, hi),
                           non_concave=non_concave, alpha_clamped=clamped, scan=scan)


# --- mode selection --------------------------------------------------------------

def optimize_mode(n: NetworkParams, s_template: SensingParams, mode: str = "hybrid", *,
                  sensing_errors: bool = True, per_hz: bool = True) -> OptimalPoint:
    """Optimal point restricted to one operating mode.

    ``htt_only`` is the hybrid branch with the backscatter rate set to zero.
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; expected one of {MODES}")
    net = n.replace(backscatter_rate=0.0) if mode == "htt_only" else n
    rule = "abc_only" if mode == "abc_only" else "optimal"
    res = optimal_tau(net, s_template, rule, 1.0, sensing_errors=sensing_errors, per_hz=per_hz)
    eps, pf, pd = _operating_probs(net, s_template, res.tau, sensing_errors)
    br = breakdown_from_probs(net, pf, pd, TimeSplit(res.tau, res.alpha, 1.0), per_hz=per_hz)
    return OptimalPoint(eps_star=eps, mu_star=1.0, alpha_star=res.alpha, tau_star=res.tau,
                        ee_max=br.ee, mode=mode, pf=pf, pd=pd, throughput=br.throughput,
                        energy=br.energy, alpha_clamped=res.alpha_clamped,
                        non_concave=res.non_concave, per_hz=per_hz)


def maximize_ee(n: NetworkParams, s_template: SensingParams, *, sensing_errors: bool = True,
                per_hz: bool = True) -> OptimalPoint:
    """Best of the hybrid branch and ABC-only operation, each with its own tau.

    Raises InfeasibleError when the false-alarm constraint admits no tau.
    Ties within 1e-12 go to the hybrid branch.
    """
    abc = optimize_mode(n, s_template, "abc_only", sensing_errors=sensing_errors, per_hz=per_hz)
    try:
        hyb = optimize_mode(n, s_template, "hybrid", sensing_errors=sensing_errors, per_hz=per_hz)
    except InfeasibleError:
        return abc
    if hyb.ee_max >= abc.ee_max - TIE_TOL * max(1.0, abs(abc.ee_max)):
        return hyb
    return abc


__all__ = [
    "AlphaSolution",
    "BbWindow",
    "MODES",
    "OptimalPoint",
    "TauSearchResult",
    "bb_window",
    "check_pf_constraint",
    "feasible_tau_interval",
    "golden_section_max",
    "htt_onset",
    "maximize_ee",
    "optimal_alpha",
    "optimal_mu",
    "optimal_tau",
    "optimal_threshold",
    "optimize_mode",
    "pf_tau_limit",
]
