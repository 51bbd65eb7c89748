"""Command-line interface.

Subcommands: simulate (single engagement), campaign (Monte Carlo sweep),
tune-c (minimax delay-fraction study), sweep-root (sign-structure sweep)
and verify (numerical property suites).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import campaign as campaign_mod
from . import engagement, tuning, verify
from .rootsweep import sweep_single_root
from .scenario import LAWS, ScenarioConfig, read_config, write_config


def _load_config(args) -> ScenarioConfig:
    if args.config:
        config = read_config(args.config)
    else:
        config = ScenarioConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "law", None) is not None:
        overrides["law"] = args.law
    if getattr(args, "t_sw", None) is not None:
        overrides["t_sw"] = args.t_sw
    return config.replace(**overrides) if overrides else config


def _ensure_outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def cmd_simulate(args) -> int:
    config = _load_config(args).replace(record_diagnostics=True)
    rec = engagement.run_engagement(config)
    out = _ensure_outdir(args.out_dir)
    rec.to_json(os.path.join(out, "run.json"))
    engagement.trajectory_csv(rec, os.path.join(out, "trajectory.csv"))
    engagement.diagnostics_to_csv(rec, os.path.join(out, "diagnostics.csv"))
    write_config(config, os.path.join(out, "config.txt"))
    print(f"law={config.law} t_sw={config.t_sw} seed={config.seed} "
          f"miss={rec.miss:.4f} m  t_end={rec.t_end:.3f} s")
    return 0


def cmd_campaign(args) -> int:
    config = _load_config(args)
    if args.t_sw_grid:
        t_sw_values = [float(x) for x in args.t_sw_grid.split(",")]
    else:
        t_sw_values = list(np.arange(0.1, 3.0 + 1e-9, 0.1))
    summary = campaign_mod.run_campaign(config, t_sw_values, args.runs,
                                        jobs=args.jobs)
    out = _ensure_outdir(args.out_dir)
    summary.to_json(os.path.join(out, f"campaign_{config.law}.json"))
    summary.stats_csv(os.path.join(out, f"stats_{config.law}.csv"))
    summary.cdf_csv(os.path.join(out, f"cdf_{config.law}.csv"))
    print(f"law={config.law} runs={args.runs}x{len(t_sw_values)} "
          f"radius(p=0.95)={summary.lethality_radius(0.95):.3f} m")
    return 0


def cmd_tune_c(args) -> int:
    config = _load_config(args)
    c_values = np.linspace(0.0, 1.0, args.c_points)
    t_sw_values = np.linspace(0.0, 3.0, args.t_sw_points)
    result = tuning.tune_c(config, c_values, t_sw_values, jobs=args.jobs)
    out = _ensure_outdir(args.out_dir)
    result.to_json(os.path.join(out, "tune_c.json"))
    print(f"C = {result.c_opt:.3f} over {args.c_points}x{args.t_sw_points} grid")
    return 0


def cmd_sweep_root(args) -> int:
    n_cases = None if args.full else args.cases
    report = sweep_single_root(n_cases=n_cases, seed=args.seed or 0)
    print(f"{report.n_cases} cases swept, "
          f"{len(report.violations)} multi-root reports")
    for v in report.violations:
        print(f"  violation: {v}")
    return 0 if report.ok else 1


def cmd_verify(args) -> int:
    results = verify.run_all(seed=args.seed or 0)
    for res in results:
        print(res.line())
    return 0 if all(r.ok for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interceptsim",
        description="Delay-aware pursuit-evasion interception simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, law=True):
        p.add_argument("--config", help="scenario config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", default="out")
        if law:
            p.add_argument("--law", choices=LAWS, default=None)

    p = sub.add_parser("simulate", help="run one engagement")
    common(p)
    p.add_argument("--t-sw", type=float, default=None,
                   help="evader switch time, s")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("campaign", help="Monte Carlo sweep over switch times")
    common(p)
    p.add_argument("--runs", type=int, default=200, help="runs per switch time")
    p.add_argument("--t-sw-grid", default=None,
                   help="comma-separated switch times (default 0.1..3.0)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_campaign)

    p = sub.add_parser("tune-c", help="minimax study of the velocity-delay fraction")
    common(p, law=False)
    p.add_argument("--c-points", type=int, default=21)
    p.add_argument("--t-sw-points", type=int, default=31)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_tune_c)

    p = sub.add_parser("sweep-root", help="sign-structure sweep of the game function")
    p.add_argument("--cases", type=int, default=10_000)
    p.add_argument("--full", action="store_true",
                   help="sweep the entire reference grid")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_sweep_root)

    p = sub.add_parser("verify", help="run the numerical property suites")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
