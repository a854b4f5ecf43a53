"""Command-line entry point.

Subcommands: ``fig1`` (perfect vs imperfect phase sweep), ``fig2``
(Gamma-scaled sweeps), ``fig3`` (Bloch-path geometry), ``verify``
(numerical battery) and ``validate-family`` (file check).

Exit codes: 0 success, 1 validation failure, 2 numerical battery failure,
3 I/O or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .errors import GeomPhaseError
from .experiments import ExperimentConfig, SweepSpec, run_fig1, run_fig2, run_fig3, run_verify
from .hamiltonian import HamiltonianFamily, validate_family

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_CONFIG = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--out", help="output file prefix")
    p.add_argument("--grid-size", type=int, dest="grid_size")
    p.add_argument("--jobs", type=int, help="parallel workers for sweep points")
    p.add_argument("--seed", type=int)
    p.add_argument("--plot", action="store_true", help="also write SVG plots (needs matplotlib)")
    p.add_argument("--theta", type=float)
    p.add_argument("--omega0", type=float)
    p.add_argument("--a0", type=float)
    p.add_argument("--a1", type=float)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--count", type=int, help="number of sweep points")
    p.add_argument("--spacing", choices=("linear", "log"))
    p.add_argument("--numeric-stride", type=int, dest="numeric_stride")
    p.add_argument("--gammas", help="comma-separated Gamma values")
    p.add_argument("--family-file", dest="family_file")
    p.add_argument("--model", choices=("spin_half", "sampled_family", "random_analytic"))
    p.add_argument("--fig3-T", type=float, dest="fig3_T")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geomphase",
        description="Geometric phases of cyclic quantum evolutions with "
        "imperfect initial states: sweeps, Bloch geometry, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("fig1", "perfect vs imperfect geometric-phase T-sweep"),
        ("fig2", "Gamma-scaled sweeps with their large-T limits"),
        ("fig3", "Bloch-sphere path geometry and solid angles"),
        ("verify", "numerical verification battery"),
        ("validate-family", "validate a sampled-family file"),
    ):
        p = sub.add_parser(name, help=help_text)
        if name == "validate-family":
            p.add_argument("path", help="family file to check")
        else:
            _add_common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    for key in (
        "out",
        "grid_size",
        "jobs",
        "seed",
        "theta",
        "omega0",
        "a0",
        "a1",
        "numeric_stride",
        "family_file",
        "model",
        "fig3_T",
    ):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    for key in ("tmin", "tmax", "count", "spacing"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg.sweep, key, value)
    if getattr(args, "gammas", None):
        cfg.gammas = [float(x) for x in args.gammas.split(",")]
    if getattr(args, "plot", False):
        cfg.plot = True
    return cfg


def _cmd_validate_family(path: str) -> int:
    try:
        family = HamiltonianFamily.from_file(path)
        report = validate_family(family)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, IndexError) as exc:
        print(f"error: malformed family file {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeomPhaseError as exc:
        print(f"FAIL: {exc}")
        return EXIT_VALIDATION
    print(
        f"hermiticity defect {report.hermiticity_defect:.3e}, "
        f"cyclicity defect {report.cyclicity_defect:.3e}, "
        f"min gap {report.min_gap:.6g} (tol {report.gap_tol:.3e})"
    )
    if report.passes:
        print("PASS")
        return EXIT_OK
    print("FAIL")
    return EXIT_VALIDATION


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate-family":
        return _cmd_validate_family(args.path)
    try:
        cfg = config_from_args(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "fig1":
            rows = run_fig1(cfg)
            print(f"wrote {cfg.out}_fig1.csv ({len(rows)} rows)")
        elif args.command == "fig2":
            tables = run_fig2(cfg)
            print(
                f"wrote {len(tables)} Gamma tables and {cfg.out}_fig2_limits.csv"
            )
        elif args.command == "fig3":
            result = run_fig3(cfg)
            print(
                f"perfect: omega = {result.perfect.omega:.6f}, "
                f"crossings = {result.perfect.crossings}"
            )
            print(
                f"imperfect: omega = {result.imperfect.omega:.6f}, "
                f"crossings = {result.imperfect.crossings}, "
                f"predicted corrected omega = {result.imperfect.omega_corrected:.6f}"
            )
            print(f"adiabatic circle: omega = {result.adiabatic_omega:.6f}")
        elif args.command == "verify":
            checks = run_verify(cfg)
            for c in checks:
                print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
            if not checks[0].passed:
                return EXIT_VALIDATION
            if not all(c.passed for c in checks):
                return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeomPhaseError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
