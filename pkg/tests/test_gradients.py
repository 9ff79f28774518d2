import math

import numpy as np
import pytest

from backscatter_ee import (
    NetworkParams,
    SensingParams,
    TimeSplit,
    alpha_dagger,
    dee_dalpha,
    dpd_deps,
    dpf_deps,
    dpf_dtau,
    energy_efficiency,
    gradient_bundle,
    prob_detection,
    prob_false_alarm,
    threshold_monotonicity_condition,
)
from backscatter_ee.exceptions import DomainError
from backscatter_ee.model import evaluate_arrays
from backscatter_ee.oracle import finite_difference


def _sensing_points(rng, count, hypothesis=0):
    """Random detector settings with the threshold within 3 spreads of the H0 or H1 mean.

    Far outside that band the probabilities round to 0 or 1 and a finite
    difference carries no information.
    """
    out = []
    for _ in range(count):
        ns = int(rng.integers(100, 5000))
        snr = rng.uniform(0.01, 1.0)
        var = rng.uniform(0.5, 2.0)
        tau = rng.uniform(0.05, 0.95)
        m = (1 - tau) * ns
        mean, spread = (1.0, 1.0) if hypothesis == 0 else (1.0 + snr, math.sqrt(2 * snr + 1))
        eps = var * (mean + spread * rng.uniform(-3.0, 3.0) / math.sqrt(m))
        out.append((SensingParams(ns, snr, var, max(eps, 1e-3)), tau))
    return out


def _fd_threshold(fn, s, tau):
    return finite_difference(lambda e: float(fn(s.with_threshold(e), tau)), s.threshold,
                             1e-6 * s.noise_variance)


class TestThresholdDerivatives:
    def test_pf_matches_fd(self):
        for s, tau in _sensing_points(np.random.default_rng(1), 100):
            assert dpf_deps(s, tau) == pytest.approx(_fd_threshold(prob_false_alarm, s, tau),
                                                     rel=1e-6, abs=1e-12)

    def test_pd_matches_fd(self):
        for s, tau in _sensing_points(np.random.default_rng(2), 100, hypothesis=1):
            assert dpd_deps(s, tau) == pytest.approx(_fd_threshold(prob_detection, s, tau),
                                                     rel=1e-6, abs=1e-12)

    def test_peak_at_noise_floor(self):
        s = SensingParams(1000, 0.1, 1.0, 1.0)
        m = 500.0
        assert dpf_deps(s, 0.5) == pytest.approx(-math.sqrt(m) / math.sqrt(2 * math.pi))

    def test_signs(self):
        for e in np.linspace(0.5, 1.6, 50):
            s = SensingParams(1000, 0.2, 1.0, e)
            assert dpf_deps(s, 0.3) <= 0 and dpd_deps(s, 0.3) <= 0

    def test_zero_snr_limit(self):
        s = SensingParams(1000, 1e-12, 1.0, 1.02)
        assert dpd_deps(s, 0.4) == pytest.approx(dpf_deps(s, 0.4), abs=1e-9)

    def test_ordering_near_noise_floor(self):
        # with the threshold close to sigma^2 the false-alarm slope is the steeper one
        for e in np.linspace(0.99, 1.01, 1000):
            s = SensingParams(2000, 0.1, 1.0, e)
            assert dpd_deps(s, 0.5) >= dpf_deps(s, 0.5)

    def test_ordering_fails_at_signal_mean(self):
        # the ordering is not universal: at eps = sigma^2 (1 + snr) the detection slope is larger
        s = SensingParams(2000, 0.1, 1.0, 1.1)
        assert dpd_deps(s, 0.5) < dpf_deps(s, 0.5)


class TestTauDerivative:
    def test_matches_fd(self):
        for s, tau in _sensing_points(np.random.default_rng(3), 100):
            h = max(1e-8, 1e-6 * tau)
            fd = finite_difference(lambda t: float(prob_false_alarm(s, t)), tau, h)
            assert dpf_dtau(s, tau) == pytest.approx(fd, rel=1e-5, abs=1e-10)

    def test_sign_follows_threshold(self):
        above = SensingParams(1000, 0.1, 1.0, 1.05)
        below = SensingParams(1000, 0.1, 1.0, 0.95)
        assert dpf_dtau(above, 0.5) > 0 > dpf_dtau(below, 0.5)

    def test_boundary_policy(self):
        s = SensingParams(1000, 0.1, 1.0, 1.05)
        assert math.isfinite(dpf_dtau(s, 1 - 1e-6))
        with pytest.raises(DomainError):
            dpf_dtau(s, 1 - 1e-7)
        with pytest.raises(DomainError):
            dpf_dtau(s, 0.0)


def _alpha_points(rng, count, interference=True):
    out = []
    while len(out) < count:
        n = NetworkParams(
            backscatter_rate=rng.uniform(0, 5e5),
            partial_throughput_factor=rng.uniform(0.2, 1.0),
            sensing_power=rng.uniform(1e-4, 3e-3),
            harvested_power=rng.uniform(0.05, 1.0),
            noise_to_channel_power=rng.uniform(1e-3, 1e-1),
            interference_gain_ratio=rng.uniform(0, 1e-3) if interference else 0.0)
        s = SensingParams(int(rng.integers(200, 4000)), rng.uniform(0.05, 0.5), 1.0,
                          rng.uniform(0.95, 1.2))
        tau, mu = rng.uniform(0.05, 0.95), rng.uniform(0.1, 1.0)
        a_dag = alpha_dagger(n, TimeSplit(tau, 1.0, mu))
        if a_dag + 1e-4 >= 1.0:
            continue
        out.append((n, s, TimeSplit(tau, rng.uniform(a_dag + 1e-4, 1.0), mu)))
    return out


class TestAlphaDerivative:
    def test_matches_fd(self):
        for n, s, t in _alpha_points(np.random.default_rng(4), 100):
            fd = finite_difference(
                lambda a: energy_efficiency(n, s, TimeSplit(t.tau, a, t.mu)).ee, t.alpha)
            scale = energy_efficiency(n, s, t).ee
            assert dee_dalpha(n, s, t) == pytest.approx(fd, rel=1e-5, abs=1e-9 * scale)

    def test_fixed_energy_surrogate(self):
        # the surrogate equals d(throughput)/d(alpha) divided by the current energy
        for n, s, t in _alpha_points(np.random.default_rng(5), 50):
            pf, pd = prob_false_alarm(s, t.tau), prob_detection(s, t.tau)

            def rate(a):
                ev = evaluate_arrays(n, pf, pd, t.tau, a, t.mu)
                return float(ev.throughput_abc + ev.throughput_htt) / n.bandwidth

            energy = float(evaluate_arrays(n, pf, pd, t.tau, t.alpha, t.mu).energy)
            fd = finite_difference(rate, t.alpha) / energy
            scale = rate(t.alpha) / energy
            assert dee_dalpha(n, s, t, fixed_energy=True) == pytest.approx(
                fd, rel=1e-5, abs=1e-9 * scale)

    def test_surrogate_decreasing(self, net, sense):
        a0 = alpha_dagger(net, TimeSplit(0.6))
        vals = [dee_dalpha(net, sense, TimeSplit(0.6, a), fixed_energy=True)
                for a in np.linspace(a0 + 1e-6, 1.0, 300)]
        assert np.all(np.diff(vals) < 0)

    def test_full_derivative_single_sign_change(self, net, sense):
        a0 = alpha_dagger(net, TimeSplit(0.6))
        vals = np.array([dee_dalpha(net, sense, TimeSplit(0.6, a))
                         for a in np.linspace(a0 + 1e-6, 1.0, 300)])
        assert np.count_nonzero(np.diff(np.sign(vals)) != 0) == 1

    def test_domain(self, net, sense):
        a0 = alpha_dagger(net, TimeSplit(0.6))
        with pytest.raises(DomainError):
            dee_dalpha(net, sense, TimeSplit(0.6, a0 / 2))

    def test_units(self, net, sense):
        t = TimeSplit(0.6, 0.3)
        assert dee_dalpha(net, sense, t, per_hz=False) == pytest.approx(
            dee_dalpha(net, sense, t) * net.bandwidth, rel=1e-12)


class TestThresholdCondition:
    def test_holds_without_backscatter(self, sense):
        # just above alpha_dagger the transmit power is tiny, so R is small
        n = NetworkParams(backscatter_rate=0.0)
        a0 = alpha_dagger(n, TimeSplit(0.5))
        assert threshold_monotonicity_condition(n, sense, TimeSplit(0.5, a0 + 1e-6))

    def test_defaults_recorded(self, net, sense, optimum):
        s = sense.with_threshold(optimum.eps_star)
        t = TimeSplit(optimum.tau_star, optimum.alpha_star)
        first = threshold_monotonicity_condition(net, s, t)
        assert first is False
        assert threshold_monotonicity_condition(net, s, t) is first

    def test_fails_for_tiny_bandwidth(self, sense):
        n = NetworkParams(bandwidth=1e-9)
        assert not threshold_monotonicity_condition(n, sense, TimeSplit(0.5, 0.5))


def test_bundle(net, sense):
    t = TimeSplit(0.5, 0.3)
    b = gradient_bundle(net, sense, t)
    assert b.dpf_deps <= 0 and b.dpd_deps <= 0
    assert b.dee_dalpha == dee_dalpha(net, sense, t)
