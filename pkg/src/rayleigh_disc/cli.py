"""Command-line interface: ``analyze``, ``sweep``, ``portrait`` and ``verify``.

Exit codes: 0 success, 1 verification failure, 2 invalid usage, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .flow import DEFAULT_ATOL, DEFAULT_RTOL, IntegrationError
from .lienardcheck import build_lienard_data, check_hypotheses
from .limitcycle import NoCycleFound, find_cycle
from .vectorfield import FORMS, RayleighParams

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERICS = 0, 1, 2, 3
SWEEP_COLUMNS = ("a", "n", "r_star", "period", "multiplier", "stability", "amp_x", "amp_y",
                 "residual", "status")
CENTER_SENTINEL = "CENTER"


class UsageError(Exception):
    pass


def _default_jobs() -> int:
    raw = os.environ.get("RAYLEIGH_DISC_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rayleigh-disc",
        description="Global dynamics of x'' + x = a (1 - x'^(2n)) x' on the Poincare disc.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, single_a=True):
        if single_a:
            p.add_argument("--a", type=float, required=True, help="damping parameter")
            p.add_argument("--n", type=int, default=1, help="exponent n >= 1")
        p.add_argument("--form", choices=FORMS, default="eq2")
        p.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
        p.add_argument("--atol", type=float, default=DEFAULT_ATOL)
        p.add_argument("--out", help="write output here instead of stdout")

    p = sub.add_parser("analyze", help="equilibria, cycle, hypotheses and class for one (a, n)")
    common(p)
    p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("sweep", help="cycle records over a range of a")
    common(p, single_a=False)
    p.add_argument("--a-min", type=float, default=-2.0)
    p.add_argument("--a-max", type=float, default=2.0)
    p.add_argument("--a-steps", type=int, default=41)
    p.add_argument("--n", type=int, action="append", dest="ns", default=None,
                   help="exponent; repeat for several")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=_default_jobs())

    p = sub.add_parser("portrait", help="Poincare-disc portrait as SVG or JSON")
    common(p)
    p.add_argument("--format", choices=("svg", "json"), default="svg")
    p.add_argument("--size", type=int, default=600, help="SVG side in pixels (>= 200)")
    p.add_argument("--jobs", type=int, default=_default_jobs())

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", help="n = 1 subset")
    p.add_argument("--json", action="store_true", help="machine-readable results")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
    p.add_argument("--atol", type=float, default=DEFAULT_ATOL)
    p.add_argument("--only", type=int, action="append", help="criterion number; repeatable")
    p.add_argument("--out")
    return parser


def _check_common(args):
    for name in ("rtol", "atol"):
        v = getattr(args, name, None)
        if v is not None and not (1e-13 <= v <= 1e-3):
            raise UsageError(f"--{name} must lie in [1e-13, 1e-3]")
    if getattr(args, "jobs", 1) < 1:
        raise UsageError("--jobs must be >= 1")


def _params(a: float, n: int) -> RayleighParams:
    if n < 1:
        raise UsageError("n must be ≥ 1")
    if not math.isfinite(a):
        raise UsageError("a must be finite")
    return RayleighParams(a, n)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# -- analyze --------------------------------------------------------------------

def analyze_report(params: RayleighParams, form: str, rtol: float, atol: float) -> dict:
    from .portrait import portrait_features

    feats = portrait_features(params, form, rtol=rtol, atol=atol)
    hyp = check_hypotheses(build_lienard_data(params))
    return {
        "origin": feats.origin.to_dict(),
        "infinite_equilibria": [p.to_dict() for p in feats.infinite],
        "cycle": feats.cycle.to_dict() if feats.cycle else None,
        "hypotheses": hyp.to_dict(),
        "class_tag": feats.class_tag,
        "signature": list(feats.signature),
        "notes": feats.notes,
    }


def _analyze_text(rep: dict) -> str:
    lines = [f"class: {rep['class_tag']}  (origin {rep['signature'][0]}, cycle {rep['signature'][1]}, "
             f"infinity {rep['signature'][2]})",
             f"origin: {rep['origin']['kind']}"]
    for ip in rep["infinite_equilibria"]:
        lines.append(f"infinity {ip['chart']} {tuple(ip['point'])}: {ip['report']['kind']}")
    cyc = rep["cycle"]
    if cyc:
        lines.append(f"cycle: r*={cyc['r_star']:.10g} T={cyc['period']:.10g} "
                     f"mu={cyc['multiplier']:.6g} ({cyc['stability']})")
    else:
        lines.append("cycle: none (linear center)")
    lines.append(f"uniqueness theorem: {rep['hypotheses']['verdict']}")
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    params = _params(args.a, args.n)
    rep = analyze_report(params, args.form, args.rtol, args.atol)
    rep = {"config": _config(args), **rep}
    if args.format == "json":
        text = json.dumps(rep, indent=2, default=str)
    else:
        text = _analyze_text(rep)
    _emit(text, args.out)
    return EXIT_OK


# -- sweep ----------------------------------------------------------------------

def sweep_values(a_min: float, a_max: float, steps: int) -> list[float]:
    if not (math.isfinite(a_min) and math.isfinite(a_max)):
        raise UsageError("range endpoints must be finite")
    if steps < 2:
        raise UsageError("--a-steps must be >= 2")
    if a_max <= a_min:
        raise UsageError("--a-max must exceed --a-min")
    # 12 significant digits keep symmetric grids exactly symmetric
    return [float(f"{v:.12g}") + 0.0 for v in np.linspace(a_min, a_max, steps)]


def sweep_row(task) -> dict:
    a, n, form, rtol, atol = task
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row.update(a=a, n=n)
    if a == 0:
        row.update(stability=CENTER_SENTINEL, status="center")
        return row
    try:
        rec = find_cycle(RayleighParams(a, n), form, rtol=rtol, atol=atol)
    except (IntegrationError, NoCycleFound, ArithmeticError, ValueError) as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}"
        return row
    row.update(rec.row())
    row["status"] = "flagged: " + "; ".join(rec.notes) if rec.flagged else "ok"
    return row


def run_sweep(values, ns, form, rtol, atol, jobs: int = 1) -> list[dict]:
    tasks = [(a, n, form, rtol, atol) for n in ns for a in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(sweep_row, tasks))
    return [sweep_row(t) for t in tasks]


def rows_to_csv(rows: list[dict], config: dict) -> str:
    buf = io.StringIO()
    for k, v in config.items():
        buf.write(f"# {k}={v}\n")
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[dict]:
    """Parse sweep output back into rows; comment lines are skipped."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def cmd_sweep(args) -> int:
    if not args.ns:
        raise UsageError("at least one --n is required")
    for n in args.ns:
        _params(0.0, n)
    values = sweep_values(args.a_min, args.a_max, args.a_steps)
    rows = run_sweep(values, args.ns, args.form, args.rtol, args.atol, args.jobs)
    config = _config(args)
    if args.format == "csv":
        text = rows_to_csv(rows, config)
    else:
        text = json.dumps({"config": config, "rows": rows}, indent=2)
    _emit(text, args.out)
    return EXIT_OK


# -- portrait -------------------------------------------------------------------

def cmd_portrait(args) -> int:
    from .portrait import build_portrait, render_svg

    params = _params(args.a, args.n)
    if args.size < 200:
        raise UsageError("--size must be >= 200")
    model = build_portrait(params, args.form, jobs=args.jobs)
    if args.format == "svg":
        svg = render_svg(model, args.size)
        cfg = json.dumps(_config(args))
        text = svg.replace(">", f"><!-- config: {cfg} -->", 1)
    else:
        text = json.dumps({"config": _config(args), **model.to_dict()}, indent=2, default=str)
    _emit(text, args.out)
    return EXIT_OK


# -- verify ---------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .acceptance import CRITERIA, run_all

    only = args.only
    if only and any(k not in CRITERIA for k in only):
        raise UsageError(f"criteria are numbered {min(CRITERIA)}..{max(CRITERIA)}")
    results = run_all(quick=args.quick, jobs=args.jobs, rtol=args.rtol, atol=args.atol, only=only)
    failed = [r.number for r in results if not r.passed]
    if args.json:
        text = json.dumps({"config": _config(args), "passed": not failed,
                           "results": [r.to_dict() for r in results]}, indent=2, default=str)
    else:
        lines = [r.line() for r in results]
        for r in results:
            for f in r.failures:
                lines.append(f"  criterion {r.number}: {f}")
        lines.append("PASS" if not failed else "FAIL: criteria " + ", ".join(map(str, failed)))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if not failed else EXIT_VERIFY


COMMANDS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "portrait": cmd_portrait,
            "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        _check_common(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, NoCycleFound, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
