"""JSON experiment configuration with validation that names the offending field."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .exceptions import ConfigError, DomainError
from .model import NetworkParams, SensingParams, TimeSplit

SWEEP_AXES = ("tau", "alpha", "snr_db", "num_samples", "target_pd", "backscatter_rate")
MODE_SET = ("hybrid", "abc_only", "htt_only", "no_sensing_errors")

_NETWORK_KEYS = tuple(f.name for f in fields(NetworkParams))
_SCALAR_KEYS = _NETWORK_KEYS + (
    "num_samples", "snr_db", "noise_variance", "harvesting_efficiency", "tau", "alpha", "mu")
_TOP_KEYS = _SCALAR_KEYS + ("sweep", "modes", "output_path", "per_hz")


@dataclass(frozen=True)
class Sweep:
    axis: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment: model parameters, optional sweep, modes and output path.

    ``explicit`` records the keys present in the file so presets can layer
    their own settings underneath them.
    """

    network: NetworkParams = field(default_factory=NetworkParams)
    num_samples: int = 2000
    snr_db: float = -10.0
    noise_variance: float = 1.0
    harvesting_efficiency: float = 0.6
    tau: float | None = None
    alpha: float | None = None
    mu: float = 1.0
    sweep: Sweep | None = None
    modes: tuple[str, ...] = ("hybrid", "abc_only", "htt_only")
    output_path: str | None = None
    per_hz: bool = True
    explicit: frozenset = frozenset()

    @property
    def sensing(self) -> SensingParams:
        return SensingParams.from_db(self.num_samples, self.snr_db, self.noise_variance)

    def time_split(self, tau: float, alpha: float) -> TimeSplit:
        return TimeSplit(tau, alpha, self.mu)

    def explicit_overrides(self) -> dict:
        """Scalar parameters the file set explicitly, as a flat dict."""
        flat = self.to_dict()
        return {k: flat[k] for k in sorted(self.explicit) if k in _SCALAR_KEYS}

    def to_dict(self) -> dict:
        out = {k: getattr(self.network, k) for k in _NETWORK_KEYS}
        out.update(num_samples=self.num_samples, snr_db=self.snr_db,
                   noise_variance=self.noise_variance,
                   harvesting_efficiency=self.harvesting_efficiency,
                   tau=self.tau, alpha=self.alpha, mu=self.mu, modes=list(self.modes),
                   output_path=self.output_path, per_hz=self.per_hz)
        out["sweep"] = None if self.sweep is None else {
            "axis": self.sweep.axis, "values": list(self.sweep.values)}
        return out


def _number(data: dict, key: str, *, integer: bool = False):
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, "must be a number")
    if not math.isfinite(v):
        raise ConfigError(key, "must be finite")
    if integer:
        if int(v) != v:
            raise ConfigError(key, "must be an integer")
        return int(v)
    return float(v)


def _parse_sweep(raw) -> Sweep:
    if not isinstance(raw, dict):
        raise ConfigError("sweep", "must be an object with 'axis' and 'values'")
    unknown = set(raw) - {"axis", "values"}
    if unknown:
        raise ConfigError(f"sweep.{sorted(unknown)[0]}", "unknown key")
    axis = raw.get("axis")
    if axis not in SWEEP_AXES:
        raise ConfigError("sweep.axis", f"unknown axis {axis!r}; expected one of {SWEEP_AXES}")
    values = raw.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values", "must be a non-empty list")
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v)
           for v in values):
        raise ConfigError("sweep.values", "must contain finite numbers")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("sweep.values", "must be strictly increasing")
    return Sweep(axis, tuple(float(v) for v in values))


def _as_config_error(err: DomainError) -> ConfigError:
    head, _, rest = str(err).partition(":")
    if head in _TOP_KEYS and rest:
        return ConfigError(head, rest.strip())
    return ConfigError("config", str(err))


def config_from_dict(data: dict) -> ExperimentConfig:
    """Validate a parsed JSON object and fill defaults for absent fields."""
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown field")
    net_kwargs = {k: _number(data, k) for k in _NETWORK_KEYS if k in data}
    if "prior_idle" in net_kwargs and "prior_busy" not in net_kwargs:
        net_kwargs["prior_busy"] = 1.0 - net_kwargs["prior_idle"]
    elif "prior_busy" in net_kwargs and "prior_idle" not in net_kwargs:
        net_kwargs["prior_idle"] = 1.0 - net_kwargs["prior_busy"]
    kwargs: dict = {}
    if "num_samples" in data:
        kwargs["num_samples"] = _number(data, "num_samples", integer=True)
    for key in ("snr_db", "noise_variance", "harvesting_efficiency", "tau", "alpha", "mu"):
        if key in ("tau", "alpha") and data.get(key, 0.0) is None:
            continue  # null means "let the optimizer choose", as echoed by to_dict
        if key in data:
            kwargs[key] = _number(data, key)
    if "sweep" in data and data["sweep"] is not None:
        kwargs["sweep"] = _parse_sweep(data["sweep"])
    if "modes" in data:
        modes = data["modes"]
        if not isinstance(modes, list) or not modes or any(m not in MODE_SET for m in modes):
            raise ConfigError("modes", f"must be a non-empty list drawn from {MODE_SET}")
        kwargs["modes"] = tuple(dict.fromkeys(modes))
    if "output_path" in data and data["output_path"] is not None:
        if not isinstance(data["output_path"], str):
            raise ConfigError("output_path", "must be a string")
        kwargs["output_path"] = data["output_path"]
    if "per_hz" in data:
        if not isinstance(data["per_hz"], bool):
            raise ConfigError("per_hz", "must be a boolean")
        kwargs["per_hz"] = data["per_hz"]
    try:
        network = NetworkParams(**net_kwargs)
        cfg = ExperimentConfig(network=network, explicit=frozenset(data), **kwargs)
        cfg.sensing  # validates num_samples, snr and noise_variance
        if not 0.0 <= cfg.harvesting_efficiency <= 1.0:
            raise DomainError("harvesting_efficiency: must lie in [0, 1]")
        if cfg.tau is not None or cfg.alpha is not None:
            TimeSplit(cfg.tau if cfg.tau is not None else 0.5,
                      cfg.alpha if cfg.alpha is not None else 1.0, cfg.mu)
        elif not 0.0 < cfg.mu <= 1.0:
            raise DomainError("mu: must lie in (0, 1]")
    except DomainError as err:
        raise _as_config_error(err) from None
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file; raises ConfigError naming the field."""
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError("path", f"cannot read {path}: {err.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError("json", f"line {err.lineno}: {err.msg}") from None
    return config_from_dict(data)


__all__ = [
    "ExperimentConfig",
    "MODE_SET",
    "SWEEP_AXES",
    "Sweep",
    "config_from_dict",
    "load_config",
]
