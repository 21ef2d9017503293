"""Command-line front end: ``jcdisc <verb> --problem FILE ...``.

Exit codes: 0 success, 2 validation error, 3 resource budget exceeded.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from ._accel import pareto_indices
from .core import BudgetError, DomainError, FiniteDistribution, ShapeError, mutual_information
from .io import (
    dumps,
    load_problem,
    problem_hash,
    render_csv,
    render_json,
    round_sig,
    to_units,
    write_atomic,
)
from .region import (
    membership,
    minimax_frontier,
    np_frontier,
    rate_exponent_surface,
    s_grid,
)
from .sim import (
    LlrtSpec,
    exact_error_pair,
    monte_carlo_error_pair,
    np_theory_exponent,
    np_threshold_search,
    quantize_type,
)
from .tilt import DEFAULT_S_POINTS, exponent_frontier, exponent_pair

EXIT_OK, EXIT_VALIDATION, EXIT_BUDGET = 0, 2, 3


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _px_arg(text: str):
    return "sweep" if text == "sweep" else _float_list(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jcdisc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"jcdisc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--problem", required=True, help="problem JSON file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--units", choices=("nats", "bits"), default="nats")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"),
                           help="output format (default: from --out suffix, else csv)")
        p.add_argument("--px-resolution", type=int, default=None,
                       help="simplex lattice resolution N for input laws k/N")

    p = sub.add_parser("frontier", help="exponent frontier for a fixed px, or the full surface")
    common(p)
    p.add_argument("--px", type=_px_arg, required=True, help="comma-separated px, or 'sweep'")
    p.add_argument("--s-points", type=int, default=DEFAULT_S_POINTS)

    p = sub.add_parser("surface", help="Pareto surface of (rate, E0, E1)")
    common(p)
    p.add_argument("--s-points", type=int, default=DEFAULT_S_POINTS)

    p = sub.add_parser("minimax", help="rate vs Chernoff exponent frontier")
    common(p)

    p = sub.add_parser("np", help="rate vs Neyman-Pearson exponent frontier")
    common(p)

    p = sub.add_parser("membership", help="grid-certified membership of (R, E0, E1)")
    common(p, fmt=False)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--e0", type=float, required=True)
    p.add_argument("--e1", type=float, required=True)
    p.add_argument("--s-points", type=int, default=DEFAULT_S_POINTS)

    p = sub.add_parser("simulate", help="exact or Monte-Carlo error probabilities of the LLR test")
    common(p, fmt=False)
    p.add_argument("--px", type=_float_list, required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--s", type=float, help="tilt parameter of the threshold test")
    mode.add_argument("--alpha", type=float, help="type-I cap for the Neyman-Pearson search")
    p.add_argument("--n", type=_int_list, required=True, help="comma-separated blocklengths")
    p.add_argument("--method", choices=("exact", "monte-carlo"), default="exact")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    return ap


def _meta(args, problem, **extra) -> dict:
    meta = {
        "tool": f"jcdisc {__version__}",
        "command": args.command,
        "problem_sha256": problem_hash(problem),
        "units": args.units,
    }
    meta.update(extra)
    return meta


def _px_columns(k: int) -> list[str]:
    return [f"px_{i}" for i in range(k)]


def _emit_table(args, kind, columns, rows, meta) -> str:
    fmt = args.format or ("json" if (args.out or "").endswith(".json") else "csv")
    if fmt == "json":
        return render_json(kind, columns, rows, meta)
    return render_csv(columns, rows, meta)


def _surface_rows(rate, e0, e1, s, px, units):
    rate, e0, e1 = (to_units(a, units) for a in (rate, e0, e1))
    return [[r, a, b, t, *p] for r, a, b, t, p in zip(rate, e0, e1, s, px)]


def cmd_surface(args, problem) -> str:
    surf = rate_exponent_surface(problem, args.px_resolution, args.s_points)
    meta = _meta(args, problem, px_grid_resolution=surf.meta["px_grid_resolution"],
                 s_points=args.s_points)
    cols = ["rate", "e0", "e1", "s", *_px_columns(problem.in_size)]
    rows = _surface_rows(surf.rate, surf.e0, surf.e1, surf.s, surf.px, args.units)
    return _emit_table(args, "surface", cols, rows, meta)


def cmd_frontier(args, problem) -> str:
    if args.px == "sweep":
        return cmd_surface(args, problem)
    px = FiniteDistribution(args.px)
    if px.alphabet_size != problem.in_size:
        raise ShapeError(f"--px has {px.alphabet_size} entries, problem has {problem.in_size} inputs")
    pts = exponent_frontier(problem, px, s_grid(args.s_points))
    # drop repeated pairs (a degenerate problem collapses to one row)
    keep = np.sort(pareto_indices(np.array([[p.e0, p.e1] for p in pts])))
    pts = [pts[i] for i in keep]
    rate = mutual_information(px, problem.comm)
    n = len(pts)
    rows = _surface_rows(np.full(n, rate), [p.e0 for p in pts], [p.e1 for p in pts],
                         [p.s for p in pts], np.tile(px.probs, (n, 1)), args.units)
    meta = _meta(args, problem, px=",".join(map(str, args.px)), s_points=args.s_points)
    return _emit_table(args, "frontier", ["rate", "e0", "e1", "s", *_px_columns(problem.in_size)],
                       rows, meta)


def cmd_minimax(args, problem) -> str:
    cur = minimax_frontier(problem, args.px_resolution)
    rows = [[r, e, s, *p] for r, e, s, p in zip(to_units(cur.rate, args.units),
                                                 to_units(cur.exponent, args.units), cur.s, cur.px)]
    meta = _meta(args, problem, px_grid_resolution=cur.meta["px_grid_resolution"])
    return _emit_table(args, "minimax", ["rate", "e", "s", *_px_columns(problem.in_size)], rows, meta)


def cmd_np(args, problem) -> str:
    cur = np_frontier(problem, args.px_resolution)
    rows = [[r, e, *p] for r, e, p in zip(to_units(cur.rate, args.units),
                                          to_units(cur.exponent, args.units), cur.px)]
    meta = _meta(args, problem, px_grid_resolution=cur.meta["px_grid_resolution"],
                 alpha_independent="true (same region for every alpha in (0,1))")
    return _emit_table(args, "np", ["rate", "e", *_px_columns(problem.in_size)], rows, meta)


def cmd_membership(args, problem) -> str:
    scale = 1.0 if args.units == "nats" else math.log(2.0)
    res = membership(problem, args.rate * scale, args.e0 * scale, args.e1 * scale,
                     args.px_resolution, args.s_points)
    doc = {
        "kind": "membership",
        "meta": _meta(args, problem),
        "query": round_sig({"rate": args.rate, "e0": args.e0, "e1": args.e1}),
        "member": res.member,
        "px": None if res.px is None else round_sig(res.px.probs.tolist()),
        "s": round_sig(res.s),
    }
    return dumps(doc)


def _exponent(eps: float, n: int, units: str) -> Optional[float]:
    if eps <= 0:
        return math.inf
    return float(to_units(-math.log(eps) / n, units))


def cmd_simulate(args, problem) -> str:
    px = FiniteDistribution(args.px)
    if px.alphabet_size != problem.in_size:
        raise ShapeError(f"--px has {px.alphabet_size} entries, problem has {problem.in_size} inputs")
    if args.trials < 1:
        raise DomainError("--trials must be >= 1")
    if not args.n or any(n < 1 for n in args.n):
        raise DomainError("--n needs positive blocklengths")
    if args.alpha is not None and args.method != "exact":
        raise DomainError("the Neyman-Pearson search (--alpha) needs --method exact")
    phash = problem_hash(problem)
    runs = []
    for n in args.n:
        comp = quantize_type(px, n)
        run = {"problem_hash": phash, "comp": list(comp.counts), "n": n, "method": args.method}
        if args.s is not None:
            spec = LlrtSpec.for_composition(problem, comp, args.s)
            if args.method == "exact":
                ep = exact_error_pair(problem, comp, spec)
            else:
                ep = monte_carlo_error_pair(problem, comp, spec, args.trials, args.seed)
            theory = exponent_pair(problem, px, args.s)
            run.update(s=args.s, threshold=spec.threshold,
                       theory_e0=float(to_units(theory.e0, args.units)),
                       theory_e1=float(to_units(theory.e1, args.units)))
        else:
            threshold, ep = np_threshold_search(problem, comp, args.alpha)
            run.update(alpha=args.alpha, threshold=threshold, theory_e0=None,
                       theory_e1=float(to_units(np_theory_exponent(problem, comp), args.units)))
        run.update(eps0=ep.eps0, eps1=ep.eps1, ci=list(ep.ci_halfwidth),
                   seed=args.seed if args.method == "monte-carlo" else None,
                   trials=args.trials if args.method == "monte-carlo" else None,
                   empirical_e0=_exponent(ep.eps0, n, args.units),
                   empirical_e1=_exponent(ep.eps1, n, args.units))
        runs.append(round_sig(run))
    doc = {"kind": "simulation", "meta": _meta(args, problem, seed=args.seed), "runs": runs}
    return dumps(doc)


COMMANDS = {
    "frontier": cmd_frontier,
    "surface": cmd_surface,
    "minimax": cmd_minimax,
    "np": cmd_np,
    "membership": cmd_membership,
    "simulate": cmd_simulate,
}


def _manifest(args, problem, argv) -> str:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command",)}
    doc = {
        "command": args.command,
        "argv": list(argv),
        "parameters": round_sig({k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()}),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "problem_hash": problem_hash(problem),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    return dumps(doc)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        problem = load_problem(args.problem)
        text = COMMANDS[args.command](args, problem)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DomainError, ShapeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.out:
        write_atomic(args.out, text)
        write_atomic(args.out + ".manifest.json", _manifest(args, problem, argv))
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
