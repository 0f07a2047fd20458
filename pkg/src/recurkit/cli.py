"""Command-line surface.

Eight subcommands cover the toolkit: spectral stats with a recurrence-time
table, crossing scans, TAM and TFIM quench builders, critical sweeps, the
universal recurrence shape, the classical torus baseline, and synthetic
spectra.  Data goes to stdout or --out files; diagnostics go to stderr.
Exit status: 0 success, 1 validation error (including bad flags), 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import fileio
from .classical import TorusSpec, torus_flow_simulate, torus_recurrence_time
from .crossings import (
    ModeSetProvider,
    ScanConfig,
    SpectrumProvider,
    scan_crossings,
    worker_count,
)
from .errors import NumericalError, ValidationError
from .models import QuenchSpec, critical_sweep, quench_spectrum, tfim_modes
from .quasifree import (
    log_recurrence_time_integrable,
    quasifree_stats,
    recurrence_time_integrable,
)
from .recurrence import (
    density_generic,
    log_recurrence_time_generic,
    recurrence_time_generic,
    universal_function,
)
from .spectrum import spectral_stats
from .synthetic import random_spectrum


class _UsageError(ValidationError):
    """Bad command line (unknown flag, missing argument)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we map usage to status 1
        raise _UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _read_spectrum(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read spectrum file {path}: {exc}") from exc
    return fileio.parse_spectrum(text)


def _u_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad level list {text!r}") from exc


def _tr_entry(u: float, stats) -> dict:
    log_tr = log_recurrence_time_generic(u, stats)
    return {
        "u": u,
        "density": density_generic(u, stats),
        "TR": recurrence_time_generic(u, stats),
        "log_TR": log_tr,
    }


def _stats_doc(stats) -> dict:
    return {
        "mean_fidelity": stats.mean_fidelity,
        "delta_E": stats.delta_E,
        "moment_D": stats.moment_D,
        "moment_E": stats.moment_E,
        "moment_F": stats.moment_F,
        "delta": stats.delta,
        "total_weight": stats.total_weight,
        "spectral_width": stats.spectral_width,
    }


def _cmd_stats(args) -> int:
    s = _read_spectrum(args.spectrum)
    stats = spectral_stats(s)
    if args.u:
        levels = _u_list(args.u)
    else:
        top = s.peak_fidelity
        levels = [min(x * stats.mean_fidelity, top) for x in (0.5, 1.0, 2.0, 4.0)]
    doc = {
        "stats": _stats_doc(stats),
        "recurrence": [_tr_entry(u, stats) for u in levels],
    }
    _write_output(fileio.to_json_text(doc), args.out)
    return 0


def _cmd_scan(args) -> int:
    s = _read_spectrum(args.spectrum)
    config = ScanConfig(
        horizon_T=args.T,
        oversample=args.oversample,
        blocks=args.blocks,
        burn_in=args.burn_in,
    )
    report = scan_crossings(
        SpectrumProvider(s), args.u, config, workers=worker_count()
    )
    if args.format == "json":
        _write_output(fileio.to_json_text(fileio.report_doc(report)), args.out)
    else:
        _write_output(fileio.report_csv_text(report), args.out)
    return 0


def _cmd_tam(args) -> int:
    spec = QuenchSpec(L=args.L, kappa1=args.k1, h1=args.h1, kappa2=args.k2, h2=args.h2)
    s = quench_spectrum(spec, deg_tol=args.deg_tol)
    stats = spectral_stats(s)
    if args.out is not None:
        _write_output(fileio.to_json_text(fileio.spectrum_doc(s)), args.out)
        _write_output(fileio.to_json_text({"stats": _stats_doc(stats)}), None)
    else:
        doc = {"spectrum": fileio.spectrum_doc(s), "stats": _stats_doc(stats)}
        _write_output(fileio.to_json_text(doc), None)
    return 0


def _cmd_tfim(args) -> int:
    modes = tfim_modes(args.L, args.h1, args.h2)
    stats = quasifree_stats(modes)
    levels = _u_list(args.u) if args.u else [0.98]
    table = [
        {
            "u": u,
            "TR": recurrence_time_integrable(u, stats),
            "log_TR": log_recurrence_time_integrable(u, stats),
        }
        for u in levels
    ]
    stats_doc = {
        "mean_logF": stats.mean_logF,
        "sigma_Z": stats.sigma_Z,
        "sigma_Zprime": stats.sigma_Zprime,
    }
    if args.out is not None:
        _write_output(fileio.to_json_text(fileio.modeset_doc(modes)), args.out)
        doc = {"stats": stats_doc, "recurrence": table}
    else:
        doc = {
            "modes": fileio.modeset_doc(modes),
            "stats": stats_doc,
            "recurrence": table,
        }
    if args.scan_T is not None:
        config = ScanConfig(horizon_T=args.scan_T, oversample=args.oversample)
        report = scan_crossings(
            ModeSetProvider(modes), levels[0], config, workers=worker_count()
        )
        doc["scan"] = fileio.report_doc(report)
    _write_output(fileio.to_json_text(doc), None)
    return 0


def _cmd_sweep(args) -> int:
    grid = np.linspace(args.h1_min, args.h1_max, args.steps)
    rows = critical_sweep(
        args.model,
        grid,
        args.dh,
        args.u,
        args.L,
        kappa=args.kappa,
        workers=worker_count(),
    )
    _write_output(fileio.sweep_csv_text(rows), args.out)
    return 0


def _cmd_universal(args) -> int:
    if args.points < 2:
        raise ValidationError("need at least two points")
    xs = np.linspace(args.xmin, args.xmax, args.points)
    us = [universal_function(float(x)) for x in xs]
    _write_output(fileio.universal_csv_text(xs, us), args.out)
    return 0


def _cmd_torus(args) -> int:
    spec = TorusSpec(
        omegas=np.asarray(_u_list(args.omegas)),
        windows=np.asarray(_u_list(args.windows)),
    )
    doc = {"analytic_TR": torus_recurrence_time(spec)}
    if args.simulate:
        if args.horizon is None or args.step is None:
            raise ValidationError("--simulate needs --horizon and --step")
        entries, empirical = torus_flow_simulate(spec, args.horizon, args.step)
        doc["entries"] = entries
        doc["empirical_TR"] = empirical
    _write_output(fileio.to_json_text(doc), args.out)
    return 0


def _cmd_synth(args) -> int:
    s = random_spectrum(args.d, args.seed, args.profile, args.scale)
    _write_output(fileio.to_json_text(fileio.spectrum_doc(s)), args.out)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="rtk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="spectral moments and recurrence-time table")
    p.add_argument("--spectrum", required=True, help="spectrum JSON file")
    p.add_argument("--u", help="comma-separated fidelity levels")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("scan", help="brute-force crossing scan of F(t) = u")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--T", type=float, required=True, help="scan horizon")
    p.add_argument("--oversample", type=int, default=16)
    p.add_argument("--blocks", type=int, default=16)
    p.add_argument("--burn-in", dest="burn_in", type=float, default=0.0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(fn=_cmd_scan)

    p = sub.add_parser("tam", help="TAM quench spectrum via dense diagonalization")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--k1", type=float, required=True)
    p.add_argument("--h1", type=float, required=True)
    p.add_argument("--k2", type=float, required=True)
    p.add_argument("--h2", type=float, required=True)
    p.add_argument("--deg-tol", dest="deg_tol", type=float, default=1e-10)
    p.add_argument("--out", help="write the spectrum JSON here (stats to stdout)")
    p.set_defaults(fn=_cmd_tam)

    p = sub.add_parser("tfim", help="TFIM quench mode set and recurrence time")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--h1", type=float, required=True)
    p.add_argument("--h2", type=float, required=True)
    p.add_argument("--u", help="comma-separated fidelity levels (default 0.98)")
    p.add_argument("--scan-T", dest="scan_T", type=float,
                   help="also scan crossings of ln F = ln u over this horizon")
    p.add_argument("--oversample", type=int, default=16)
    p.add_argument("--out", help="write the mode-set JSON here")
    p.set_defaults(fn=_cmd_tfim)

    p = sub.add_parser("sweep", help="recurrence time across a critical point")
    p.add_argument("--model", choices=("tam", "tfim"), required=True)
    p.add_argument("--h1-min", dest="h1_min", type=float, required=True)
    p.add_argument("--h1-max", dest="h1_max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--dh", type=float, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("universal", help="tabulate the universal shape U(x)")
    p.add_argument("--xmin", type=float, required=True)
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_universal)

    p = sub.add_parser("torus", help="classical torus recurrence baseline")
    p.add_argument("--omegas", required=True, help="comma-separated frequencies")
    p.add_argument("--windows", required=True, help="comma-separated box sides")
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--horizon", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_torus)

    p = sub.add_parser("synth", help="seeded synthetic spectrum")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--profile", choices=("flat", "exponential"), default="flat")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_synth)

    return parser


def dispatch(argv: list[str]) -> int:
    """Run one subcommand; returns the process exit status."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
