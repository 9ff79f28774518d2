"""Command-line entry point: ``run``, ``optimize`` and ``simulate`` subcommands.

Exit codes: 0 success, 2 configuration or usage error, 3 infeasible constraints.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from .config import ExperimentConfig, load_config
from .exceptions import ConfigError, DomainError, InfeasibleError, ResourceError
from .model import TimeSplit, energy_efficiency
from .optimizer import maximize_ee, optimal_threshold
from .presets import PRESETS, make_setup, run_preset, table_to_csv
from .simulator import DETECTOR_MODELS, SimConfig, simulate

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = _u64(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="backscatter-ee", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="write a figure preset as CSV")
    run.add_argument("--preset", required=True, choices=sorted(PRESETS))
    run.add_argument("--config", help="JSON config file")
    run.add_argument("--out", help="output CSV path (default: config output_path or stdout)")
    run.add_argument("--seed", type=_u64, default=0, help="echoed in the CSV header")
    run.add_argument("--baseline-drop-sensing", action="store_true",
                     help="zero the sensing energy in the perfect-sensing baseline")

    opt = sub.add_parser("optimize", help="print the optimal operating point as JSON")
    opt.add_argument("--config", help="JSON config file")
    opt.add_argument("--no-sensing-errors", action="store_true",
                     help="optimize with perfect sensing (Pd = 1, Pf = 0)")

    sim = sub.add_parser("simulate", help="Monte-Carlo check of the analytic averages")
    sim.add_argument("--config", help="JSON config file")
    sim.add_argument("--frames", type=_positive_int, required=True)
    sim.add_argument("--seed", type=_u64, required=True)
    sim.add_argument("--detector", choices=DETECTOR_MODELS, default="gaussian_approx")
    sim.add_argument("--workers", type=_positive_int, default=1)

    for sp in (run, opt, sim):
        sp.add_argument("--bits-per-joule", action="store_true",
                        help="report EE in bits/J instead of bits/Hz/J")
    return p


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.bits_per_joule:
        cfg = dataclasses.replace(cfg, per_hz=False)
    return cfg


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _cmd_run(args) -> int:
    cfg = _config(args)
    table = run_preset(args.preset, cfg, drop_sensing=args.baseline_drop_sensing)
    text = table_to_csv(table, config=cfg.to_dict(), seed=args.seed)
    out = args.out or cfg.output_path
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_optimize(args) -> int:
    cfg = _config(args)
    st = make_setup(cfg)
    point = maximize_ee(st.network, st.sensing(), sensing_errors=not args.no_sensing_errors,
                        per_hz=st.per_hz)
    print(json.dumps(_json_safe(point.as_dict()), sort_keys=True, indent=2))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _config(args)
    st = make_setup(cfg)
    n, s = st.network, st.sensing()
    point = None
    if cfg.tau is None or cfg.alpha is None:
        point = maximize_ee(n, s, per_hz=st.per_hz)
    tau = cfg.tau if cfg.tau is not None else point.tau_star
    alpha = cfg.alpha if cfg.alpha is not None else (point.alpha_star if cfg.tau is None else 1.0)
    t = TimeSplit(tau, alpha, cfg.mu)
    s = s.with_threshold(optimal_threshold(s, tau, n.target_pd))
    analytic = energy_efficiency(n, s, t, per_hz=st.per_hz)
    res = simulate(n, s, t, SimConfig(args.frames, args.seed, args.detector, args.workers),
                   per_hz=st.per_hz)
    report = {"config": cfg.to_dict(), "operating_point": {
        "tau": t.tau, "alpha": t.alpha, "mu": t.mu, "threshold": s.threshold},
        "analytic": analytic.as_dict(), "simulation": res.as_dict()}
    print(json.dumps(_json_safe(report), sort_keys=True, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "optimize": _cmd_optimize, "simulate": _cmd_simulate}[args.command]
    try:
        return handler(args)
    except (ConfigError, DomainError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ResourceError as err:
        print(f"resource error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
