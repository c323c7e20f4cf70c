"""Command-line front end: ``xxzpin {spectrum,sweep,gap-certify,verify,figure}``.

Exit codes: 0 success, 2 usage error, 3 regime refusal, 4 numerical failure.
A ``--config FILE`` of ``key=value`` lines supplies defaults for any flag
(keys spelled like the long flags, dashes or underscores); explicit flags
win.  ``XXZPIN_THREADS`` sets the worker count for sweeps.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import DEFAULT, Config
from .figures import PRESETS, SweepSpec, run_figure, run_sweep, sweep_csv, sweep_svg
from .gap_bound import CertificateRefused, ClosedFormMismatch, certify_gap
from .model import BoundaryCondition, ModelSpec, SectorCouplingError, build_hamiltonian
from .output import csv_text, svg_lines, write_text
from .solver import ConvergenceError, lowest_eigenpairs, sector_resolved_spectrum
from .verify import SUITES, format_report, run_suite

EXIT_OK, EXIT_USAGE, EXIT_REFUSED, EXIT_NUMERIC = 0, 2, 3, 4

# flag defaults, applied after the config file
DEFAULTS = {
    "bc": "kink",
    "sites": 13,
    "spin": "1/2",
    "delta": 2.25,
    "field": "0,0,0",
    "site": None,
    "k": 16,
    "steps": 49,
    "param": "b1",
    "start": -1.2,
    "stop": 1.2,
}
CONFIG_KEYS = ("seed", "tol", "dense_cap", "matfree_threshold", "max_restarts", "krylov_max", "cluster_tol", "threads")


class UsageError(Exception):
    pass


def parse_field(text: str) -> tuple[float, float, float]:
    parts = str(text).split(",")
    if len(parts) != 3:
        raise UsageError(f"--field needs three comma-separated numbers, got {text!r}")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--field has a non-numeric entry: {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError("--field entries must be finite")
    return vals


def parse_spin(text) -> str:
    s = str(text).strip()
    try:
        val = float(eval_fraction(s))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"invalid --spin {text!r}") from None
    if val <= 0 or abs(2 * val - round(2 * val)) > 1e-12:
        raise UsageError(f"--spin must be a positive half-integer, got {text!r}")
    return s


def eval_fraction(s: str):
    from fractions import Fraction

    return Fraction(s)


def read_config_file(path: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from the config file, then from DEFAULTS."""
    file_vals = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, value in file_vals.items():
        if hasattr(args, key) and getattr(args, key) in (None, False):
            setattr(args, key, value)
    for key in ("check", "quick", "sector_resolved"):
        if isinstance(getattr(args, key, None), str):
            setattr(args, key, getattr(args, key).lower() in ("1", "true", "yes", "on"))
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    cfg = {k: getattr(args, k) for k in CONFIG_KEYS if getattr(args, k, None) is not None}
    args.runtime = Config.from_mapping(cfg) if cfg else DEFAULT
    return args


def _spec_from(args) -> ModelSpec:
    try:
        BoundaryCondition.parse(args.bc)
    except (KeyError, ValueError):
        raise UsageError(f"unknown --bc {args.bc!r}") from None
    field = parse_field(args.field)
    spin = parse_spin(args.spin)
    sites, delta = int(args.sites), float(args.delta)
    if sites < 2:
        raise UsageError("--sites must be >= 2")
    if delta <= 1:
        raise UsageError("--delta must exceed 1")
    site = int(args.site) if args.site is not None else (sites + 1) // 2
    if not 1 <= site <= sites:
        raise UsageError(f"--site must lie in [1, {sites}]")
    return ModelSpec.make(sites, eval_fraction(spin), delta, args.bc, b=field, y=site)


def _emit(text: str, path: str | None) -> None:
    if path and path != "-":
        write_text(path, text)
    else:
        sys.stdout.write(text)


def cmd_spectrum(args) -> int:
    spec = _spec_from(args)
    k = int(args.k)
    if k < 1:
        raise UsageError("--k must be >= 1")
    if args.sector_resolved:
        if not spec.fld.is_axial:
            raise UsageError("--sector-resolved needs an axial field (B1 = B2 = 0)")
        res = sector_resolved_spectrum(spec)
        vals, labels = res.eigenvalues[:k], res.sector_labels[:k]
        rows = [[i, float(v), float(m)] for i, (v, m) in enumerate(zip(vals, labels))]
        text = csv_text(["index", "eigenvalue", "sector_m"], rows)
    else:
        h = build_hamiltonian(spec, config=args.runtime)
        vals = lowest_eigenpairs(h, min(k, spec.dim), args.runtime).eigenvalues
        text = csv_text(["index", "eigenvalue"], [[i, float(v)] for i, v in enumerate(vals)])
    _emit(text, args.out)
    if args.svg:
        idx = list(range(len(vals)))
        write_text(args.svg, svg_lines([("spectrum", idx, [float(v) for v in vals])], "index", "energy"))
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec_from(args)
    try:
        sweep = SweepSpec(
            str(args.param).lower(), float(args.start), float(args.stop), int(args.steps), spec, int(args.k),
            bool(args.sector_resolved),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if sweep.sector_resolved and not (spec.fld.b1 == spec.fld.b2 == 0 and sweep.parameter in ("b3", "delta")):
        raise UsageError("--sector-resolved sweeps need an axial field and parameter b3 or delta")
    points = run_sweep(sweep, args.runtime)
    _emit(sweep_csv(sweep, points), args.out)
    if args.svg:
        write_text(args.svg, sweep_svg(sweep, points))
    return EXIT_OK


def cmd_gap_certify(args) -> int:
    spec = _spec_from(args)
    cert = certify_gap(spec, exact=bool(args.check), config=args.runtime)
    _emit(cert.to_record(), args.out)
    if args.check and cert.check != "PASS":
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    checks = run_suite(args.suite, quick=bool(args.quick))
    _emit(format_report(checks), args.out)
    return EXIT_OK if all(c.passed or c.informational for c in checks) else EXIT_NUMERIC


def cmd_figure(args) -> int:
    if args.id not in PRESETS:
        raise UsageError(f"unknown figure {args.id!r}; choose from {', '.join(PRESETS)}")
    csv_out, svg_out = run_figure(args.id, args.runtime)
    out = args.out or f"{args.id}.csv"
    _emit(csv_out, out)
    svg_path = args.svg or (str(Path(out).with_suffix(".svg")) if out != "-" else f"{args.id}.svg")
    write_text(svg_path, svg_out)
    return EXIT_OK


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bc", help="bare, kink, antikink, droplet, antidroplet (or ++, +-, ...)")
    p.add_argument("--sites", type=int, help="chain length b")
    p.add_argument("--spin", help="spin j, e.g. 0.5 or 1/2")
    p.add_argument("--delta", type=float, help="anisotropy Delta > 1")
    p.add_argument("--field", help="B1,B2,B3")
    p.add_argument("--site", type=int, help="pinning site y (default: chain center)")


def _add_runtime_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file with defaults for any flag")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--dense-cap", dest="dense_cap", type=int)
    p.add_argument("--matfree-threshold", dest="matfree_threshold", type=int)
    p.add_argument("--max-restarts", dest="max_restarts", type=int)
    p.add_argument("--krylov-max", dest="krylov_max", type=int)
    p.add_argument("--cluster-tol", dest="cluster_tol", type=float)
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xxzpin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="lowest eigenvalues of one Hamiltonian")
    _add_model_flags(p)
    _add_runtime_flags(p)
    p.add_argument("--k", type=int)
    p.add_argument("--svg")
    p.add_argument("--sector-resolved", dest="sector_resolved", action="store_true", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="eigenvalues along a parameter grid")
    _add_model_flags(p)
    _add_runtime_flags(p)
    p.add_argument("--param", help="b1, b2, b3 or delta")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--svg")
    p.add_argument("--sector-resolved", dest="sector_resolved", action="store_true", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gap-certify", help="martingale lower bound on the spectral gap")
    _add_model_flags(p)
    _add_runtime_flags(p)
    p.add_argument("--check", action="store_true", default=None, help="also compute the exact gap")
    p.set_defaults(func=cmd_gap_certify)

    p = sub.add_parser("verify", help="run identity suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--quick", action="store_true", default=None)
    _add_runtime_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figure", help="regenerate the data of a figure preset")
    p.add_argument("id", help=", ".join(PRESETS))
    p.add_argument("--svg")
    _add_runtime_flags(p)
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _resolve(args)
        return args.func(args)
    except (UsageError, SectorCouplingError, FileNotFoundError) as exc:
        print(f"xxzpin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificateRefused as exc:
        print(f"xxzpin: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (ConvergenceError, ClosedFormMismatch, MemoryError, np.linalg.LinAlgError) as exc:
        print(f"xxzpin: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
