"""Command-line entry point: ``lacunary <subcommand> ...``.

Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import BUDGET, TOL
from .errors import BudgetExceededError, GridTooCoarseError, InvalidInputError, LacunaryError
from .experiments import load_config, run_experiment
from .metric import (
    METRIC_COLUMNS,
    PROFILE_COLUMNS,
    TorusGrid,
    c_p,
    cauchy_bound_check,
    d_p_identity,
    fmt,
    identity_profile,
    metric_upper_bound,
    write_csv,
)
from .product import (
    CoefficientSequence,
    LacunarySequence,
    TrigPolyPair,
    as_fraction,
    centered_identity,
    determinant_residual,
    energy_identity,
    min_gap_check,
    nonlinear_parseval,
    partial_product,
    s_mn,
    shifted_energy,
)
from .representations import (
    autocorrelation_bound_check,
    classify_partition,
    enumerate_representations,
    multiplicity_bound_check,
    uniqueness_check,
)

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

# the literal 4 maxfreq + 4 grid is too coarse for log|a| when roots of a sit
# near the circle; the check subcommand oversamples by this factor
PARSEVAL_OVERSAMPLE = 16
PARSEVAL_TOL = 1e-8


def _complex(s: str) -> complex:
    try:
        return complex(s.strip().replace(" ", ""))
    except ValueError:
        raise InvalidInputError(f"not a number: {s!r}") from None


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise InvalidInputError(f"not a comma-separated integer list: {s!r}") from None


def _complex_list(s: str) -> list[complex]:
    return [_complex(x) for x in s.split(",") if x.strip()]


def _q(s: str):
    try:
        return as_fraction(s)
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError(f"q must be a number, got {s!r}") from None


# -- shared product options --------------------------------------------------------

def _add_product_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=str, help="lacunarity ratio (validated against --m-list, or used to generate m_j)")
    p.add_argument("--n", type=int, help="upper window end N (default: sequence length)")
    p.add_argument("--m", type=int, default=0, help="lower window end M (default 0)")
    p.add_argument("--m-list", type=str, help="explicit frequencies m_1,m_2,...")
    coeff = p.add_mutually_exclusive_group()
    coeff.add_argument("--b", type=str, help="the same B_j for every factor")
    coeff.add_argument("--b-list", type=str, help="B_1,B_2,... (complex like 0.3+0.1j allowed)")
    coeff.add_argument("--f-list", type=str, help="F_1,F_2,... with |F_j| < 1")


def _product_inputs(args) -> tuple[CoefficientSequence, LacunarySequence, int, int]:
    count = None
    if args.b_list:
        coeffs = CoefficientSequence.from_b(_complex_list(args.b_list))
        count = len(coeffs)
    elif args.f_list:
        coeffs = CoefficientSequence.from_f(_complex_list(args.f_list))
        count = len(coeffs)
    else:
        coeffs = None
    if args.m_list:
        freqs = LacunarySequence(_int_list(args.m_list), q=_q(args.q) if args.q else None)
        count = len(freqs) if count is None else min(count, len(freqs))
    else:
        if count is None:
            count = args.n if args.n is not None else 0
        if count < 0:
            raise InvalidInputError("--n must be non-negative")
        freqs = LacunarySequence.geometric(_q(args.q) if args.q else 2, max(count, 1))
    N = args.n if args.n is not None else count
    if coeffs is None:
        B = _complex(args.b) if args.b else 0j
        coeffs = CoefficientSequence.from_b([B] * max(N, 0))
    if not 0 <= args.m <= N:
        raise InvalidInputError(f"window ({args.m}, {N}] is invalid")
    if N > len(coeffs) or (N > 0 and N > len(freqs)):
        raise InvalidInputError(f"N = {N} exceeds the {min(len(coeffs), len(freqs))} available factors")
    return coeffs, freqs, args.m, N


def _pair_document(pair: TrigPolyPair, coeffs: CoefficientSequence, freqs: LacunarySequence) -> dict:
    doc = pair.to_json_obj()
    doc["coefficients"] = [[float(b.real), float(b.imag)] for b in coeffs.B[:pair.N]]
    doc["frequencies"] = list(freqs.window(0, pair.N)) if pair.N > 0 else []
    doc["q"] = str(freqs.q)
    return doc


def _load_pair(path) -> tuple[TrigPolyPair, CoefficientSequence | None, LacunarySequence | None]:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from None
    pair = TrigPolyPair.from_json_obj(doc)
    coeffs = freqs = None
    if "coefficients" in doc:
        try:
            coeffs = CoefficientSequence.from_b([complex(re, im) for re, im in doc["coefficients"]])
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed coefficients in {path}: {exc}") from None
    if doc.get("frequencies"):
        freqs = LacunarySequence(doc["frequencies"], q=doc.get("q"))
    return pair, coeffs, freqs


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ----------------------------------------------------------------------

def cmd_build(args) -> int:
    coeffs, freqs, M, N = _product_inputs(args)
    pair = partial_product(coeffs, freqs, M, N) if N > M else TrigPolyPair.identity(M)
    text = json.dumps(_pair_document(pair, coeffs, freqs), indent=1) + "\n"
    summary = (f"window ({M}, {N}]  support a={len(pair.a)} b={len(pair.b)}  "
               f"mean(a)={fmt(pair.a.mean().real)}{pair.a.mean().imag:+.17g}j  "
               f"S={fmt(s_mn(coeffs, M, N))}")
    if args.out:
        Path(args.out).write_text(text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return EXIT_OK


def _check_lines(pair, coeffs, freqs, parseval_grid: int | None) -> list[tuple]:
    lines = []
    for name, fn in (("energy", energy_identity), ("centered", centered_identity), ("shifted", shifted_energy)):
        r = fn(pair, coeffs)
        lines.append((name, r.lhs, r.rhs, r.residual, r.ok()))
    if freqs is not None and freqs.certified is not None and pair.N > pair.M:
        window_ratio = freqs._min_ratio(freqs.window(pair.M, pair.N))
        if window_ratio is None or window_ratio >= 2:
            g = min_gap_check(pair, freqs)
            lines.append(("gap", g.gap, g.required, g.gap - g.required, g.ok))
    t = np.arange(64) / 64 + 1 / 128
    det = determinant_residual(pair, t)
    scale = max(1.0, float(np.max(np.abs(pair.a.evaluate(t)) ** 2)))
    lines.append(("determinant", 1.0 + det, 1.0, det, det <= TOL.pointwise_abs * scale))
    literal = 4 * pair.a.max_abs_freq() + 4
    grid = parseval_grid or min(PARSEVAL_OVERSAMPLE * literal, max(literal, BUDGET.max_grid))
    pv = nonlinear_parseval(pair, coeffs, grid)
    lines.append(("parseval", pv.lhs, pv.rhs, pv.residual, pv.residual <= PARSEVAL_TOL))
    if freqs is not None and pair.N > pair.M:
        ratio = freqs._min_ratio(freqs.window(pair.M, pair.N))
        if ratio is None or ratio >= 3:
            ac = autocorrelation_bound_check(pair, coeffs)
            lines.append(("autocorrelation", ac.lhs, ac.rhs, ac.lhs - ac.rhs, ac.ok))
    if freqs is not None and pair.N > pair.M:
        cb = cauchy_bound_check(coeffs, freqs, pair.M, pair.N, 4.0, pair=pair)
        lines.append(("cauchy_p4", cb.lhs, cb.rhs, cb.lhs - cb.rhs, cb.ok))
    return lines


def cmd_check(args) -> int:
    if args.pair:
        pair, coeffs, freqs = _load_pair(args.pair)
        if coeffs is None:
            if pair.N > pair.M:
                raise InvalidInputError("pair file has no coefficients to check against")
            coeffs = CoefficientSequence([])
        if len(coeffs) < pair.N:
            raise InvalidInputError("pair file lists fewer coefficients than its window needs")
    else:
        coeffs, freqs, M, N = _product_inputs(args)
        pair = partial_product(coeffs, freqs, M, N) if N > M else TrigPolyPair.identity(M)
    lines = _check_lines(pair, coeffs, freqs, args.parseval_grid)
    if args.format == "json":
        text = json.dumps([{"name": n, "lhs": l, "rhs": r, "residual": res, "ok": bool(ok)}
                           for n, l, r, res, ok in lines], indent=1) + "\n"
    else:
        text = "".join(f"{n} {fmt(l)} {fmt(r)} {fmt(res)} {'ok' if ok else 'FAIL'}\n"
                       for n, l, r, res, ok in lines)
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    return EXIT_OK if all(line[4] for line in lines) else EXIT_CHECK


def cmd_experiment(args) -> int:
    config = load_config(args.config)
    if args.threads is not None:
        config.threads = args.threads
    formats = tuple(x.strip() for x in args.format.split(","))
    bad = set(formats) - {"csv", "json"}
    if bad:
        raise InvalidInputError(f"unknown format(s): {sorted(bad)}")
    report = run_experiment(config)
    if args.out_dir:
        stem = args.stem or Path(args.config).stem
        for path in report.write(args.out_dir, formats, stem):
            print(f"wrote {path}", file=sys.stderr)
    print(report.verdict_line())
    return EXIT_OK


def _rep_freqs(args) -> LacunarySequence:
    if args.m_list:
        return LacunarySequence(_int_list(args.m_list), q=_q(args.q) if args.q else None)
    if args.window is None:
        raise InvalidInputError("give --m-list or --window")
    return LacunarySequence.geometric(_q(args.q) if args.q else 3, args.m + args.window)


def cmd_representations(args) -> int:
    freqs = _rep_freqs(args)
    M = args.m
    N = M + args.window if args.window is not None else len(freqs)
    if not 0 <= M <= N <= len(freqs):
        raise InvalidInputError(f"window ({M}, {N}] is outside 1..{len(freqs)}")
    if args.target is not None:
        reps = enumerate_representations(args.target, freqs, M, N, args.max_j, args.max_k)
        part = classify_partition(args.target, freqs, M, N)
        doc = {"n": args.target, "window": [M, N],
               "representations": [r.to_json_obj() for r in reps],
               "partition": part.to_json_obj()}
        _emit(json.dumps(doc, indent=1) + "\n", args.out)
        return EXIT_OK
    u = uniqueness_check(freqs, M, N, args.max_j, args.max_k)
    mult = multiplicity_bound_check(freqs, M, N)
    doc = {
        "window": [M, N],
        "frequencies": list(freqs.window(M, N)),
        "mode": "theorem" if u.theorem_mode else "diagnostic",
        "values": u.values,
        "uniqueness_violations": u.violation_count,
        "counterexamples": [{"n": n, "coefficients": [list(c) for c in cs]} for n, cs in u.violations],
        "multiplicity": {"partitions": mult.partitions, "max_count": mult.max_count,
                         "worst_ratio": mult.worst_ratio, "violations": len(mult.violations),
                         "ambiguous": mult.ambiguous},
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    if u.theorem_mode and not (u.ok and mult.ok):
        return EXIT_CHECK
    return EXIT_OK


def cmd_metric(args) -> int:
    if args.pair:
        pair, coeffs, freqs = _load_pair(args.pair)
        S = s_mn(coeffs, pair.M, pair.N) if coeffs is not None else None
    else:
        coeffs, freqs, M, N = _product_inputs(args)
        pair = partial_product(coeffs, freqs, M, N) if N > M else TrigPolyPair.identity(M)
        S = s_mn(coeffs, M, N)
    grid = TorusGrid(args.grid) if args.grid else TorusGrid.for_pairs(pair)
    rows = []
    for p in args.p:
        d = d_p_identity(pair, p, grid).value
        bound = metric_upper_bound(S, p) if S is not None else math.nan
        rows.append((pair.M, pair.N, p, d, bound))
    if args.out:
        write_csv(args.out, METRIC_COLUMNS, rows)
    print(",".join(METRIC_COLUMNS))
    for row in rows:
        print(",".join(fmt(x) for x in row))
    if args.profile:
        write_csv(args.profile, PROFILE_COLUMNS, zip(grid.points, identity_profile(pair, grid)))
    return EXIT_OK


def cmd_cp(args) -> int:
    for p in args.p:
        print(f"{fmt(p)} {fmt(c_p(p))}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lacunary", description="Finite lacunary SU(1,1) products: build, check, measure.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="expand a window product into a JSON pair file")
    _add_product_options(p)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("check", help="run identity and bound checks on a pair")
    p.add_argument("--pair", help="pair JSON written by build")
    _add_product_options(p)
    p.add_argument("--parseval-grid", type=int, help="grid size for the log|a| average")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="also write the report here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("experiment", help="run an experiment from an INI config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", help="directory for report files")
    p.add_argument("--format", default="csv,json", help="comma list of csv, json")
    p.add_argument("--stem", help="report file stem (default: config name)")
    p.add_argument("--threads", type=int, help="worker threads (overrides LACUNARY_THREADS)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("representations", help="signed two-block representations over a window")
    p.add_argument("--q", type=str)
    p.add_argument("--m-list", type=str)
    p.add_argument("--m", type=int, default=0, help="window start M")
    p.add_argument("--window", type=int, help="window size N - M")
    p.add_argument("--target", type=int, help="single integer n to enumerate")
    p.add_argument("--max-j", type=int)
    p.add_argument("--max-k", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_representations)

    p = sub.add_parser("metric", help="d_p distance of a window product from the identity")
    p.add_argument("--pair")
    _add_product_options(p)
    p.add_argument("--p", type=float, nargs="+", default=[1.0])
    p.add_argument("--grid", type=int)
    p.add_argument("--out", help="CSV with M,N,p,d_p,bound")
    p.add_argument("--profile", help="CSV with t,rho")
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("cp", help="the constant C_p for p > 2")
    p.add_argument("--p", type=float, nargs="+", required=True)
    p.set_defaults(func=cmd_cp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidInputError, GridTooCoarseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LacunaryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
