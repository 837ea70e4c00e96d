"""Command-line driver: tasep-bethe {bethe,correlate,selftest,mc,spectrum}.

Exit codes: 0 success, 1 internal failure, 2 validation mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bethe import DEFAULT_TOL, BetheSolverError, solve_all
from .combinat import RingShape
from .correlator import correlation_grid
from .montecarlo import McConfig, estimate_correlation
from .oracle import build_generator, direct_correlation, spectrum

EXIT_OK, EXIT_FAIL, EXIT_MISMATCH = 0, 1, 2
DIFF_TOL = 1e-6


def manifest(command: str, shape: RingShape | None, **params) -> dict:
    return {
        "command": command,
        "shape": None if shape is None else {"M": shape.M, "N": shape.N},
        "parameters": params,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def fmt(x) -> str:
    # repr-free, locale-free, 17 significant digits
    return "" if x is None else format(float(x), ".17g")


def emit(text: str, out_path: str | None):
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_bethe(args) -> int:
    shape = RingShape(args.M, args.N)
    head = manifest("bethe", shape, tol=args.tol)
    try:
        catalog = solve_all(shape, args.tol)
    except BetheSolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.out not in (None, "-"):
            diag = {"manifest": head, "error": str(exc), "diagnostics": exc.diagnostics}
            emit(json.dumps(diag, indent=2, default=str) + "\n", args.out + ".diagnostics.json")
        return EXIT_MISMATCH
    payload = {"manifest": head, **catalog.to_json(), "max_residual": catalog.max_residual}
    emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_correlate(args) -> int:
    shape = RingShape(args.M, args.N)
    ts = [float(x) for x in args.t]
    if any(t < 0 for t in ts):
        raise ValueError("times must be non-negative")
    ms = args.m or list(range(1, shape.M + 1))
    rows = []
    bethe = {}
    if args.method in ("bethe", "both"):
        for r in correlation_grid(shape, ms, ts):
            bethe[(r.m, r.t)] = r.value
    gen = build_generator(shape) if args.method in ("oracle", "both") else None
    for m in ms:
        for t in ts:
            vb = bethe.get(((m - 1) % shape.M + 1, t))
            vo = direct_correlation(shape, (m - 1) % shape.M + 1, t, gen=gen) if gen else None
            diff = abs(vb - vo) if vb is not None and vo is not None else None
            rows.append({"m": m, "t": t, "value_bethe": vb, "value_oracle": vo, "abs_diff": diff})
    head = manifest("correlate", shape, m=ms, t=ts, method=args.method)
    if args.format == "csv":
        buf = io.StringIO()
        buf.write("# manifest: " + json.dumps(head) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        cols = ["m", "t", "value_bethe", "value_oracle", "abs_diff"]
        writer.writerow(cols)
        for row in rows:
            writer.writerow([row["m"]] + [fmt(row[c]) for c in cols[1:]])
        text = buf.getvalue()
    else:
        text = json.dumps({"manifest": head, "rows": rows}, indent=2) + "\n"
    emit(text, args.out)
    bad = [r for r in rows if r["abs_diff"] is not None and r["abs_diff"] > DIFF_TOL]
    if bad:
        print(f"error: {len(bad)} points differ by more than {DIFF_TOL:g}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .validate import run_all

    checks = run_all(args.max_M, fault=args.fault, seed=args.seed)
    for c in checks:
        print(c.row())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_mc(args) -> int:
    shape = RingShape(args.M, args.N)
    cfg = McConfig(shape, args.samples, args.t, args.m, args.seed)
    est = estimate_correlation(cfg, threads=args.threads)
    head = manifest("mc", shape, m=args.m, t=args.t, samples=args.samples, seed=args.seed)
    emit(json.dumps({"manifest": head, **est.to_json()}) + "\n", args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    shape = RingShape(args.M, args.N)
    rep = spectrum(build_generator(shape))
    payload = {
        "manifest": manifest("spectrum", shape),
        "eigenvalues": [[float(z.real), float(z.imag)] for z in np.asarray(rep.eigenvalues)],
        "zero_index": int(rep.zero_index),
        "gap": None if rep.gap is None else float(rep.gap),
    }
    emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tasep-bethe", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def shape_args(sp):
        sp.add_argument("--M", type=int, required=True, help="number of sites")
        sp.add_argument("--N", type=int, required=True, help="number of particles")
        sp.add_argument("--out", default=None, help="output file (default stdout)")

    sp = sub.add_parser("bethe", help="all Bethe solutions of a sector, as JSON")
    shape_args(sp)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.set_defaults(func=cmd_bethe)

    sp = sub.add_parser("correlate", help="stationary correlation <s_1(t) s_m(0)>")
    shape_args(sp)
    sp.add_argument("--m", type=int, nargs="+", default=None, help="sites (default all)")
    sp.add_argument("--t", type=float, nargs="+", default=[0.0, 0.1, 0.5, 1.0, 2.0, 5.0])
    sp.add_argument("--method", choices=["bethe", "oracle", "both"], default="both")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(func=cmd_correlate)

    sp = sub.add_parser("selftest", help="run the invariant suites")
    sp.add_argument("--max-M", dest="max_M", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--fault", default="none",
                    help="inject a defect to check the harness: det-sign, drop-solution, missing-norm")
    sp.set_defaults(func=cmd_selftest)

    sp = sub.add_parser("mc", help="Monte Carlo estimate, as JSON")
    shape_args(sp)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("spectrum", help="generator eigenvalues, as JSON")
    shape_args(sp)
    sp.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ZeroDivisionError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
