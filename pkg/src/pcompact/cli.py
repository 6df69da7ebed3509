"""Command-line front end: ``pcompact {derive,wavenumber,solve,convergence,bench}``.

Every subcommand writes CSV or text artifacts into the output directory
(``--out``, else ``$PCOMPACT_OUT``, else ``./pcompact_out``).  Exit codes:
0 success, 2 invalid arguments, 3 numerical failure, 4 benchmark too short.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import catalog, lab, prefactor as pf, solver, spectral
from .errors import (
    BenchmarkInvalidError,
    CatalogMissError,
    PCompactError,
    PostShockError,
)

log = logging.getLogger("pcompact")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_BENCH = 0, 2, 3, 4
OUT_ENV = "PCOMPACT_OUT"
DEFAULT_OUT = "pcompact_out"
VERIFY_POINTS = 64


class UsageError(Exception):
    """Invalid flag combination detected after parsing."""


def write_atomic(path: Path, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0 or not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _int_list(text: str) -> list[int]:
    return [_positive_int(t) for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [_positive_float(t) for t in text.split(",") if t.strip()]


def _label_list(text: str) -> list[str]:
    labels = [t.strip().upper() for t in text.split(",") if t.strip()]
    if not labels:
        raise argparse.ArgumentTypeError("expected at least one scheme label")
    return labels


def _order(text: str) -> int:
    v = _positive_int(text)
    if v % 2 or not 4 <= v <= 16:
        raise argparse.ArgumentTypeError(f"order must be even and in 4..16, got {v}")
    return v


def _pair(text: str) -> tuple[str, str]:
    parts = [t.strip().upper() for t in text.split(":")]
    if len(parts) != 2 or not parts[0].startswith("PC") or not parts[1].startswith("C"):
        raise argparse.ArgumentTypeError(f"expected PCn:Cn, got {text!r}")
    return parts[0], parts[1]


def _fmt(v: float) -> str:
    return f"{v:.15g}"


# --- subcommands ---------------------------------------------------------------


def cmd_derive(args, out: Path) -> int:
    if args.scheme_file:
        schemes = catalog.load(args.scheme_file)
        if not schemes:
            raise UsageError(f"no schemes found in {args.scheme_file}")
        stem = Path(args.scheme_file).stem
    else:
        d = catalog.derive(*_half_widths(args.order))
        schemes = [d.scheme]
        stem = d.scheme.label
    pres = [pf.prefactor(s) for s in schemes]
    write_atomic(out / f"{stem}_classical.txt", catalog.dumps(schemes))
    write_atomic(out / f"{stem}_prefactored.txt", pf.dumps(pres))
    lines = ["label, n, operator_residual, autocorrelation_residual, explicit_residual, commutator, ok"]
    for s, p in zip(schemes, pres):
        n = max(VERIFY_POINTS, 4 * max(s.halo, p.halo))
        r = pf.verify_factorization(s, p, n)
        lines.append(", ".join([p.label, str(n), _fmt(r.operator_residual), _fmt(r.autocorrelation_residual),
                                _fmt(r.explicit_residual), _fmt(r.commutator), str(r.ok)]))
        print(f"{p.label}: beta = {', '.join(f'{v:.12f}' for v in p.beta)}; "
              f"b = {', '.join(f'{v:.12f}' for v in p.b)}")
    write_atomic(out / f"{stem}_residuals.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def _half_widths(order: int) -> tuple[int, int]:
    s = catalog.scheme_for_order(order)
    return s.nc, s.ne


def cmd_wavenumber(args, out: Path) -> int:
    classical, pre = [], []
    for label in args.schemes:
        if label.startswith("PC"):
            pre.append(pf.prefactor(catalog.builtin(label[1:])))
        else:
            classical.append(catalog.builtin(label))
    k_curves = [spectral.curve(s, "wavenumber", args.samples) for s in classical + pre]
    write_atomic(out / "wavenumber.csv", spectral.curves_csv(k_curves))
    if classical:
        for kind, name in (("phase-velocity", "phase.csv"), ("group-velocity", "group.csv")):
            curves = [spectral.curve(s, kind, args.samples) for s in classical]
            write_atomic(out / name, spectral.curves_csv(curves))
    print(f"wrote {args.samples} samples for {', '.join(args.schemes)} to {out}")
    return EXIT_OK


def _integrator(args) -> solver.TimeIntegrator:
    label = args.scheme
    integ = solver.TimeIntegrator.for_label(label, alternate=args.alternate)
    if args.integrator and args.integrator != integ.kind:
        raise UsageError(f"{label} runs with {integ.kind}, not {args.integrator}")
    return integ


def _problem(args, order: int, t_final: float) -> solver.AdvectionProblem:
    if args.case == "linear":
        return solver.linear_case(args.n, t_final=t_final, dt=args.dt, order=order)
    return solver.burgers_case(args.n, t_final=t_final, dt=args.dt, order=order,
                               allow_post_shock=args.allow_post_shock)


def cmd_solve(args, out: Path) -> int:
    if args.n is None:
        args.n = {"linear": 1000, "burgers": 160}[args.case]
    tf = args.tf or (lab.PUBLISHED_T_FINAL if args.paper_scale else lab.DESK_T_FINAL)[args.case]
    integ = _integrator(args)
    times = sorted(set([t for t in (args.snapshots or []) if t < tf] + [tf]))
    norms = None
    for t in times:
        problem = _problem(args, integ.order, t)
        u, report = solver.run(problem, integ)
        try:
            exact = solver.exact_solution(problem, t).values
        except PostShockError:
            log.warning("t = %g is past the shock time; no analytic comparison", t)
            exact = np.full(problem.grid.n, np.nan)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "u_numerical", "u_exact"])
        for xi, ui, ei in zip(problem.grid.x, u.values, exact):
            w.writerow([_fmt(xi), _fmt(ui), _fmt(ei)])
        write_atomic(out / f"{args.case}_{integ.label}_n{args.n}_t{t:g}.csv", buf.getvalue())
        if t == tf and np.all(np.isfinite(exact)):
            norms = lab.norms_of(u.values - exact)
    print(f"{integ.label} {args.case} n={args.n} steps={report.steps} dt={_fmt(report.dt)} "
          f"cfl={report.cfl:.4g}")
    if norms is not None:
        print(f"l1={_fmt(norms.l1)} l2={_fmt(norms.l2)} linf={_fmt(norms.linf)}")
    return EXIT_OK


def cmd_convergence(args, out: Path) -> int:
    if len(args.grids) < 2:
        raise UsageError("convergence needs at least two grids")
    if any(b <= a for a, b in zip(args.grids, args.grids[1:])):
        raise UsageError("grids must be strictly increasing")
    scale = args.grid_scale if args.grid_scale is not None else lab.GRID_SCALE[args.case]
    points = [g * scale for g in args.grids]
    tf = args.tf or (lab.PUBLISHED_T_FINAL if args.paper_scale else lab.DESK_T_FINAL)[args.case]
    study = lab.convergence_study(args.case, args.scheme, points, t_final=tf, dt=args.dt)
    write_atomic(out / f"convergence_{args.case}_{study.label}.csv", study.to_csv())
    for n, msg in study.failures.items():
        print(f"n={n}: FAILED ({msg})")
    if not study.complete:
        return EXIT_NUMERIC
    print(f"{study.label} {args.case}: p = {study.p_endpoint():.4f} over n = {points[0]}..{points[-1]}")
    return EXIT_OK


def cmd_bench(args, out: Path) -> int:
    pc, c = args.pair
    report = lab.benchmark_pair(pc, c, args.n, args.steps, args.repeats)
    write_atomic(out / f"bench_{pc}_{c}.csv", report.to_csv())
    print(f"{report.pair}: PC {1e3 * report.t_pc:.1f} ms, C {1e3 * report.t_c:.1f} ms, "
          f"decrease {report.decrease_pct:.1f}% (derivative kernels {report.kernel_decrease_pct:.1f}%)")
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcompact", description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="classical and prefactored weights with residual report")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--order", type=_order)
    g.add_argument("--scheme-file", type=Path)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("wavenumber", help="wavenumber, phase and group velocity CSVs")
    p.add_argument("--schemes", type=_label_list, default=_label_list("C4,C6,C8,C10,C12,C14,C16"))
    p.add_argument("--samples", type=_positive_int, default=spectral.DEFAULT_SAMPLES)
    p.set_defaults(func=cmd_wavenumber)

    p = sub.add_parser("solve", help="march one case and write snapshots")
    p.add_argument("--case", choices=lab.CASES, default="linear")
    p.add_argument("--scheme", default="PC6", type=str.upper)
    p.add_argument("--n", type=_positive_int, default=None, help="grid points")
    p.add_argument("--dt", type=_positive_float, default=None)
    p.add_argument("--tf", type=_positive_float, default=None)
    p.add_argument("--snapshots", type=_float_list, default=None, help="comma-separated output times")
    p.add_argument("--integrator", choices=("maccormack", "tvd-rk2"), default=None)
    p.add_argument("--alternate", action="store_true", help="alternate F/B stage order (MacCormack)")
    p.add_argument("--allow-post-shock", action="store_true")
    p.add_argument("--paper-scale", action="store_true", help="use the published final time")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("convergence", help="observed order over a grid sequence")
    p.add_argument("--case", choices=lab.CASES, default="linear")
    p.add_argument("--scheme", default="PC6", type=str.upper)
    p.add_argument("--grids", type=_int_list, required=True, help="grid labels, e.g. 40,60,80,100")
    p.add_argument("--grid-scale", type=_positive_int, default=None,
                   help="points per grid label (default 10 linear, 1 burgers)")
    p.add_argument("--dt", type=_positive_float, default=None)
    p.add_argument("--tf", type=_positive_float, default=None)
    p.add_argument("--paper-scale", action="store_true", help="use the published final time")
    p.set_defaults(func=cmd_convergence, alternate=False)

    p = sub.add_parser("bench", help="time PCn+MacCormack against Cn+TVD-RK2")
    p.add_argument("--pair", type=_pair, default=_pair("PC6:C6"))
    p.add_argument("--n", type=_positive_int, default=10000)
    p.add_argument("--steps", type=_positive_int, default=2000)
    p.add_argument("--repeats", type=_positive_int, default=5)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = args.out or Path(os.environ.get(OUT_ENV, DEFAULT_OUT))
    try:
        return args.func(args, out)
    except (UsageError, CatalogMissError) as exc:
        return _usage(parser, exc)
    except BenchmarkInvalidError as exc:
        print(f"pcompact: benchmark invalid: {exc}", file=sys.stderr)
        return EXIT_BENCH
    except PCompactError as exc:
        print(f"pcompact: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, OSError) as exc:
        return _usage(parser, exc)


def _usage(parser, exc) -> int:
    parser.print_usage(sys.stderr)
    print(f"pcompact: error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
