"""Figure presets, the perfect-sensing baseline and a deterministic CSV writer.

Each preset returns a :class:`Table`; rows are produced in axis order and
floats are written with ``repr`` so output files are byte-identical across
runs. Points where the false-alarm target cannot be met are kept and marked
with ``feasible = 0`` and NaN metrics.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .config import ExperimentConfig, Sweep
from .exceptions import ConfigError, DomainError, InfeasibleError
from .model import (
    EEBreakdown,
    NetworkParams,
    SensingParams,
    TimeSplit,
    breakdown_from_probs,
    ee_arrays,
)
from .optimizer import (
    OptimalPoint,
    _optimal_alpha,
    _pf_at_target,
    feasible_tau_interval,
    optimal_threshold,
    optimal_tau,
    optimize_mode,
)

SNR_GRID_DB = tuple(float(v) for v in range(-15, 1))
BB_GRID = tuple(float(v) for v in np.round(np.logspace(3, 8, 26), 6))
NAN = math.nan


@dataclass(frozen=True)
class Table:
    name: str
    header: tuple[str, ...]
    rows: tuple[tuple, ...]
    params: dict

    def column(self, name: str) -> np.ndarray:
        k = self.header.index(name)
        return np.array([row[k] for row in self.rows], dtype=float)


class Setup(NamedTuple):
    network: NetworkParams
    num_samples: int
    snr_db: float
    noise_variance: float
    per_hz: bool

    def sensing(self, snr_db: float | None = None, num_samples: int | None = None):
        return SensingParams.from_db(self.num_samples if num_samples is None else num_samples,
                                     self.snr_db if snr_db is None else snr_db,
                                     self.noise_variance)

    def with_network(self, **changes) -> "Setup":
        return self._replace(network=self.network.replace(**changes))

    def as_dict(self) -> dict:
        out = {k: getattr(self.network, k) for k in self.network.__dataclass_fields__}
        out.update(num_samples=self.num_samples, snr_db=self.snr_db,
                   noise_variance=self.noise_variance, per_hz=self.per_hz)
        return out


_SETUP_KEYS = ("num_samples", "snr_db", "noise_variance")


def make_setup(cfg: ExperimentConfig, preset: dict | None = None,
               per_hz: bool | None = None) -> Setup:
    """Defaults, then preset settings, then keys set explicitly in the config file."""
    values = cfg.to_dict()
    values.update(preset or {})
    values.update(cfg.explicit_overrides())
    net = {k: values[k] for k in NetworkParams.__dataclass_fields__}
    if "prior_idle" in (preset or {}) and "prior_busy" not in (preset or {}):
        net["prior_busy"] = 1.0 - net["prior_idle"]
    return Setup(NetworkParams(**net), int(values["num_samples"]), float(values["snr_db"]),
                 float(values["noise_variance"]), cfg.per_hz if per_hz is None else per_hz)


# --- baseline ------------------------------------------------------------------

def no_sensing_errors_baseline(n: NetworkParams, t: TimeSplit, *, drop_sensing: bool = False,
                               per_hz: bool = True) -> EEBreakdown:
    """EE with perfect knowledge of the PU state (Pd = 1, Pf = 0).

    The sensing slot and its energy are kept unless ``drop_sensing`` is set,
    in which case the sensing power is zeroed.
    """
    net = n.replace(sensing_power=0.0) if drop_sensing else n
    return breakdown_from_probs(net, 0.0, 1.0, t, per_hz=per_hz)


# --- optimizer helpers ------------------------------------------------------------

class ModeSet(NamedTuple):
    best: OptimalPoint | None
    hybrid: OptimalPoint | None
    abc_only: OptimalPoint | None
    htt_only: OptimalPoint | None


def _try_mode(n, s, mode, sensing_errors, per_hz) -> OptimalPoint | None:
    try:
        return optimize_mode(n, s, mode, sensing_errors=sensing_errors, per_hz=per_hz)
    except InfeasibleError:
        return None


def all_modes(n: NetworkParams, s: SensingParams, *, sensing_errors: bool = True,
              per_hz: bool = True) -> ModeSet:
    """Optimal points for each mode plus the overall best (ties to the hybrid branch)."""
    hyb = _try_mode(n, s, "hybrid", sensing_errors, per_hz)
    abc = _try_mode(n, s, "abc_only", sensing_errors, per_hz)
    htt = _try_mode(n, s, "htt_only", sensing_errors, per_hz)
    best = abc
    if hyb is not None and (abc is None or hyb.ee_max >= abc.ee_max - 1e-12 * max(1.0, abc.ee_max)):
        best = hyb
    return ModeSet(best, hyb, abc, htt)


def _ee(p: OptimalPoint | None) -> float:
    return NAN if p is None else p.ee_max


def _tau(p: OptimalPoint | None) -> float:
    return NAN if p is None else p.tau_star


def _effective(setup: Setup, drop_sensing: bool) -> NetworkParams:
    return setup.network.replace(sensing_power=0.0) if drop_sensing else setup.network


# --- presets ---------------------------------------------------------------------

def fig2(cfg: ExperimentConfig, drop_sensing: bool = False) -> Table:
    """EE over an (alpha, tau) grid with mu = 1 and the Pd-target threshold."""
    st = make_setup(cfg, {"num_samples": 1000, "sensing_power": 0.3e-3,
                          "partial_throughput_factor": 0.6})
    n, s = st.network, st.sensing()
    taus = np.round(np.linspace(0.02, 0.98, 49), 12)
    alphas = np.round(np.linspace(0.0, 1.0, 51), 12)
    rows = []
    for tau in taus:
        pf = float(_pf_at_target(s, tau, n.target_pd))
        ee = ee_arrays(n, pf, n.target_pd, tau, alphas, 1.0, per_hz=st.per_hz)
        feas = int(pf <= n.target_pf)
        for a, v in zip(alphas, ee):
            rows.append((float(tau), float(a), float(v), pf, feas))
    return Table("fig2", ("tau", "alpha", "ee", "pf", "pf_feasible"), tuple(rows), st.as_dict())


def _alpha_star_or_zero(n, pf, pd, tau, per_hz) -> tuple[float, float]:
    """EE and alpha of the better of the hybrid branch and ABC-only at a fixed tau."""
    ee0 = float(ee_arrays(n, pf, pd, tau, 0.0, 1.0, per_hz=per_hz))
    try:
        a = _optimal_alpha(n, pf, pd, tau, 1.0, per_hz=per_hz).alpha
    except InfeasibleError:
        return ee0, 0.0
    ee1 = float(ee_arrays(n, pf, pd, tau, a, 1.0, per_hz=per_hz))
    return (ee1, a) if ee1 >= ee0 else (ee0, 0.0)


def fig3(cfg: ExperimentConfig, drop_sensing: bool = False) -> Table:
    """EE versus tau at the optimal alpha for three SNR values."""
    st = make_setup(cfg)
    n = st.network
    taus = np.round(np.linspace(0.005, 0.995, 199), 12)
    rows = []
    for snr in (-12.0, -10.0, -8.0):
        s = st.sensing(snr_db=snr)
        for tau in taus:
            pf = float(_pf_at_target(s, tau, n.target_pd))
            ee, a = _alpha_star_or_zero(n, pf, n.target_pd, tau, st.per_hz)
            rows.append((snr, float(tau), a, ee, pf, int(pf <= n.target_pf)))
    return Table("fig3", ("snr_db", "tau", "alpha_star", "ee", "pf", "pf_feasible"),
                 tuple(rows), st.as_dict())


def fig4(cfg: ExperimentConfig, drop_sensing: bool = False) -> Table:
    """EE versus alpha for three fixed values of tau."""
    st = make_setup(cfg)
    n, s = st.network, st.sensing()
    alphas = np.round(np.linspace(0.0, 1.0, 201), 12)
    rows = []
    for tau in (0.2, 0.4, 0.6):
        pf = float(_pf_at_target(s, tau, n.target_pd))
        for a in alphas:
            br = breakdown_from_probs(n, pf, n.target_pd, TimeSplit(tau, float(a), 1.0),
                                      per_hz=st.per_hz)
            rows.append((tau, float(a), br.ee, br.ee_abc, br.ee_htt, int(br.htt_feasible),
                         int(pf <= n.target_pf)))
    return Table("fig4", ("tau", "alpha", "ee", "ee_abc", "ee_htt", "htt_feasible",
                          "pf_feasible"), tuple(rows), st.as_dict())


def _snr_family(cfg: ExperimentConfig, label: str, values, apply: Callable[[Setup, float], Setup],
                preset: dict | None = None) -> tuple[Setup, list[tuple]]:
    st = make_setup(cfg, preset)
    rows = []
    for snr in SNR_GRID_DB:
        row: list = [snr]
        for v in values:
            sub = apply(st, v)
            best = all_modes(sub.network, sub.sensing(snr_db=snr), per_hz=st.per_hz).best
            row += [_ee(best), _tau(best)]
        rows.append(tuple(row))
    return st, rows


def fig5(cfg: ExperimentConfig, drop_sensing: bool = False) -> Table:
    """Optimal EE versus SNR for several sample counts."""
    values = (500, 1000, 2000)
    st, rows = _snr_family(cfg, "ns", values, lambda st, v: st._replace(num_samples=v))
    header = ("snr_db",) + sum(((f"ee_ns{v}", f"tau_ns{v}") for v in values), ())
    return Table("fig5", header, tuple(rows), st.as_dict())


def fig6(cfg: ExperimentConfig, drop_sensing: bool = False) -> Table:
    """Optimal EE versus SNR for several detection targets."""
    values = (0.8, 0.9, 0.99)
    st, rows = _snr_family(cfg, "pd", values, lambda st, v: st.with_network(target_pd=v))
    header = ("snr_db",) + sum(((f"ee_pd{v}", f"tau_pd{v}") for v in values), ())
    return Table("fig6", header, tuple(rows), st.as_dict())


def fig7(cfg: ExperimentConfig, drop_sensing: bool = False) -> Table:
    """Throughput and energy at the optimum versus SNR for several detection targets."""
    st = make_setup(cfg)
    rows = []
    for pd in (0.8, 0.9, 0.99):
        n = st.network.replace(target_pd=pd)
        for snr in SNR_GRID_DB:
            best = all_modes(n, st.sensing(snr_db=snr), per_hz=st.per_hz).best
            if best is None:
                rows.append((pd, snr, 0, NAN, NAN, NAN, NAN, ""))
            else:
                rows.append((pd, snr, 1, best.throughput, best.energy, best.ee_max,
                             best.tau_star, best.mode))
    return Table("fig7", ("target_pd", "snr_db", "feasible", "throughput", "energy", "ee",
                          "tau_star", "mode"), tuple(rows), st.as_dict())


def fig8(cfg: ExperimentConfig, drop_sensing: bool = False) -> Table:
    """Optimal EE versus backscatter rate for each mode and for the combined selector."""
    st = make_setup(cfg, {"num_samples": 1000, "harvested_power": 1.0})
    s = st.sensing()
    htt = all_modes(st.network, s, per_hz=st.per_hz).htt_only  # independent of the rate
    rows = []
    for bb in BB_GRID:
        ms = all_modes(st.network.replace(backscatter_rate=bb), s, per_hz=st.per_hz)
        rows.append((bb, _ee(ms.abc_only), _ee(htt), _ee(ms.best),
                     "" if ms.best is None else ms.best.mode))
    return Table("fig8", ("backscatter_rate", "ee_abc_only", "ee_htt_only", "ee_hybrid",
                          "selected_mode"), tuple(rows), st.as_dict())


def fig9(cfg: ExperimentConfig, drop_sensing: bool = False) -> Table:
    """Optimal EE versus SNR with and without sensing errors."""
    st = make_setup(cfg, {"num_samples": 2000, "harvested_power": 1.0})
    ideal_net = _effective(st, drop_sensing)
    rows = []
    for snr in SNR_GRID_DB:
        s = st.sensing(snr_db=snr)
        real = all_modes(st.network, s, per_hz=st.per_hz)
        ideal = all_modes(ideal_net, s, sensing_errors=False, per_hz=st.per_hz)
        rows.append((snr, _ee(real.best), _ee(ideal.best), _ee(real.abc_only),
                     _ee(real.htt_only), _ee(ideal.abc_only), _ee(ideal.htt_only),
                     int(real.best is not None)))
    params = st.as_dict()
    params["baseline_drop_sensing"] = drop_sensing
    return Table("fig9", ("snr_db", "ee_with_errors", "ee_no_sensing_errors",
                          "ee_abc_only_with_errors", "ee_htt_only_with_errors",
                          "ee_abc_only_no_sensing_errors", "ee_htt_only_no_sensing_errors",
                          "feasible"), tuple(rows), params)


# --- config-driven sweep -----------------------------------------------------------

def _sweep_setup(st: Setup, axis: str, value: float) -> Setup:
    if axis == "snr_db":
        return st._replace(snr_db=value)
    if axis == "num_samples":
        if int(value) != value:
            raise DomainError("num_samples: sweep values must be integers")
        return st._replace(num_samples=int(value))
    if axis == "target_pd":
        return st.with_network(target_pd=value)
    if axis == "backscatter_rate":
        return st.with_network(backscatter_rate=value)
    return st


def _fixed_tau_point(n: NetworkParams, s: SensingParams, tau: float, mode: str,
                     per_hz: bool) -> tuple[int, float, float, float, float]:
    ideal = mode == "no_sensing_errors"
    if ideal:
        pf, pd = 0.0, 1.0
    else:
        optimal_threshold(s, tau, n.target_pd)  # rejects degenerate sensing
        pf, pd = float(_pf_at_target(s, tau, n.target_pd)), n.target_pd
    if mode == "abc_only":
        ee, a = float(ee_arrays(n, pf, pd, tau, 0.0, 1.0, per_hz=per_hz)), 0.0
    elif mode == "htt_only":
        net = n.replace(backscatter_rate=0.0)
        a = _optimal_alpha(net, pf, pd, tau, 1.0, per_hz=per_hz).alpha
        ee = float(ee_arrays(net, pf, pd, tau, a, 1.0, per_hz=per_hz))
    else:
        ee, a = _alpha_star_or_zero(n, pf, pd, tau, per_hz)
    feasible = int(ideal or pf <= n.target_pf)
    return feasible, tau, a, ee, pf


def _fixed_alpha_point(n: NetworkParams, s: SensingParams, alpha: float, mode: str,
                       per_hz: bool) -> tuple[int, float, float, float, float]:
    errors = mode != "no_sensing_errors"
    net = n.replace(backscatter_rate=0.0) if mode == "htt_only" else n
    a = 0.0 if mode == "abc_only" else alpha
    bounds = feasible_tau_interval(net, s, hybrid=False, sensing_errors=errors)
    res = optimal_tau(net, s, lambda tau, pf, pd: a, 1.0, sensing_errors=errors,
                      per_hz=per_hz, bounds=bounds)
    pf = float(_pf_at_target(s, res.tau, n.target_pd)) if errors else 0.0
    return 1, res.tau, a, res.ee, pf


def _optimized_point(n, s, mode, per_hz) -> tuple[int, float, float, float, float]:
    if mode == "no_sensing_errors":
        p = all_modes(n, s, sensing_errors=False, per_hz=per_hz).best
    elif mode == "hybrid":
        p = all_modes(n, s, per_hz=per_hz).best
    else:
        p = _try_mode(n, s, mode, True, per_hz)
    if p is None:
        return 0, NAN, NAN, NAN, NAN
    return 1, p.tau_star, p.alpha_star, p.ee_max, p.pf


def sweep(cfg: ExperimentConfig, drop_sensing: bool = False) -> Table:
    """Sweep from the config file: one row per (axis value, mode)."""
    if cfg.sweep is None:
        raise ConfigError("sweep", "the sweep preset needs a 'sweep' entry in the config")
    sw: Sweep = cfg.sweep
    st = make_setup(cfg)
    rows = []
    for value in sw.values:
        try:
            sub = _sweep_setup(st, sw.axis, value)
            s = sub.sensing()
        except DomainError as err:
            raise ConfigError("sweep.values", str(err)) from None
        for mode in cfg.modes:
            n = _effective(sub, drop_sensing) if mode == "no_sensing_errors" else sub.network
            try:
                if sw.axis == "tau":
                    if not 0.0 < value < 1.0:
                        raise ConfigError("sweep.values", "tau values must lie in (0, 1)")
                    point = _fixed_tau_point(n, s, value, mode, st.per_hz)
                elif sw.axis == "alpha":
                    if not 0.0 <= value <= 1.0:
                        raise ConfigError("sweep.values", "alpha values must lie in [0, 1]")
                    point = _fixed_alpha_point(n, s, value, mode, st.per_hz)
                else:
                    point = _optimized_point(n, s, mode, st.per_hz)
            except (InfeasibleError, DomainError) as err:
                if isinstance(err, ConfigError):
                    raise
                point = (0, NAN, NAN, NAN, NAN)
            rows.append((value, mode) + point)
    return Table("sweep", (sw.axis, "mode", "feasible", "tau", "alpha", "ee", "pf"),
                 tuple(rows), st.as_dict())


PRESETS: dict[str, Callable[..., Table]] = {
    "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5,
    "fig6": fig6, "fig7": fig7, "fig8": fig8, "fig9": fig9, "sweep": sweep,
}


def run_preset(name: str, cfg: ExperimentConfig | None = None, *,
               drop_sensing: bool = False) -> Table:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    return PRESETS[name](cfg or ExperimentConfig(), drop_sensing)


# --- CSV -----------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def table_to_csv(table: Table, config: dict | None = None, seed: int | None = None) -> str:
    """CSV text: a '#' comment block echoing the resolved configuration, a header, then rows."""
    buf = io.StringIO()
    echo = {"preset": table.name, "params": table.params, "config": config, "seed": seed}
    for line in json.dumps(echo, sort_keys=True, indent=1, default=_fmt).splitlines():
        buf.write(f"# {line}\n")
    buf.write(",".join(table.header) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def read_csv_table(text: str) -> tuple[list[str], list[list[str]]]:
    """Parse :func:`table_to_csv` output back into header and string rows."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


__all__ = [
    "BB_GRID",
    "PRESETS",
    "SNR_GRID_DB",
    "ModeSet",
    "Setup",
    "Table",
    "all_modes",
    "make_setup",
    "no_sensing_errors_baseline",
    "read_csv_table",
    "run_preset",
    "table_to_csv",
]
