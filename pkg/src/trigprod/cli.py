"""Command-line front end.

Exit codes:
  0  success (including verdict "finding")
  1  verification failed
  2  invalid arguments
  3  pole guard rejected the evaluation
  4  tolerance, precision floor or range cap exceeded
  5  too few samples for a rate fit
"""

from __future__ import annotations

import argparse
import sys

from . import report
from .bench import DEFAULT_SEED, bench_formulas
from .convergence import fit_rate
from .errors import (
    IndexOutOfRange,
    InsufficientSamples,
    PoleProximity,
    RangeCapExceeded,
    ToleranceUnreachable,
    UnsupportedFormula,
)
from .numerics import PrecisionCfg, default_precision, to_complex
from .product_core import Formula, ProductRequest, finite_rhs_log, partial_product
from .verification import (
    DEFAULT_FINITE_INDICES,
    GridSpec,
    crosscheck_terms,
    default_grid,
    example1_row,
    verify_identity,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_POLE, EXIT_LIMIT, EXIT_SAMPLES = range(6)

FORMULA_CHOICES = [f.value for f in Formula]


class UsageError(Exception):
    pass


# -- argument parsing helpers -------------------------------------------------

def parse_grid(text):
    """``"re=a:b:n,im=a:b:n"`` -> (re_range, im_range); im defaults to 0:0:1."""
    axes = {"im": (0, 0, 1)}
    for part in text.split(","):
        key, sep, spec = part.partition("=")
        key = key.strip()
        if not sep or key not in ("re", "im"):
            raise UsageError(f"bad grid component {part!r}; expected re=a:b:n or im=a:b:n")
        fields = spec.split(":")
        if len(fields) != 3:
            raise UsageError(f"bad grid range {spec!r}; expected a:b:n")
        try:
            lo, hi, count = float(fields[0]), float(fields[1]), int(fields[2])
        except ValueError as exc:
            raise UsageError(f"bad grid range {spec!r}") from exc
        if count < 1 or lo > hi:
            raise UsageError(f"bad grid range {spec!r}; need a <= b and n >= 1")
        axes[key] = (fields[0], fields[1], count)
    if "re" not in axes:
        raise UsageError("grid needs a re=a:b:n component")
    return axes["re"], axes["im"]


def parse_int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from exc
    if not values:
        raise UsageError("empty integer list")
    return values


def parse_indices(text):
    """``"0:3,1:4"`` -> [(0, 3), (1, 4)]; ``"12,24"`` -> [12, 24]."""
    out = []
    for part in text.split(","):
        try:
            if ":" in part:
                m, n = part.split(":")
                out.append((int(m), int(n)))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise UsageError(f"bad index spec {part!r}") from exc
    return out


def _precision(args):
    if args.precision is None:
        return default_precision()
    try:
        return PrecisionCfg(args.precision)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _z(text, prec):
    try:
        return to_complex(text, prec)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _flags(flags):
    return sorted(f.value for f in flags)


# -- payloads -----------------------------------------------------------------

def eval_payload(res, formula, rhs=None):
    b = res.bits
    out = {
        "formula": formula.value,
        "value": report.cplx(res.value, b),
        "log_value": report.cplx(res.log_value, b),
        "terms_used": res.terms_used,
        "est_remainder": None if res.est_remainder is None else report.real(float(res.est_remainder), 53),
        "flags": _flags(res.flags),
        "winding": res.winding,
        "precision_retries": res.retries,
    }
    if rhs is not None:
        ctx = PrecisionCfg(b).ctx
        out["rhs"] = report.cplx(rhs.value, b)
        out["identity_residual"] = report.real(abs(ctx.expm1(res.log_value - rhs.log_value)), b)
    return out


def _index_json(idx):
    if isinstance(idx, tuple):
        return {"m": idx[0], "n": idx[1]}
    return {"N": idx}


def verification_payload(rep, per_point=False):
    b = rep.bits
    worst = rep.worst
    out = {
        "formula": rep.formula,
        "verdict": rep.verdict,
        "tolerance": report.real(float(rep.tolerance), 53),
        "points_tested": rep.points_tested,
        "points_skipped": rep.points_skipped,
        "max_rel_residual": report.real(rep.max_rel_residual, b),
        "worst_point": None if worst is None else {
            "z": report.cplx(worst.z, b), "q": worst.q, "index": _index_json(worst.index),
        },
        "skipped": [
            {"z": report.cplx(p.z, b), "q": p.q, "index": _index_json(p.index), "reason": p.skip_reason}
            for p in rep.skips
        ],
        "notes": list(rep.notes),
        "extra": {
            k: (report.real(v, b) if hasattr(v, "_mpf_") else v) for k, v in rep.extra.items()
        },
    }
    if per_point:
        out["per_point"] = [
            {
                "z": report.cplx(p.z, b), "q": p.q, "index": _index_json(p.index),
                "residual": report.real(p.residual, b), "skip_reason": p.skip_reason,
                "flags": _flags(p.flags),
            }
            for p in rep.per_point
        ]
    return out


def convergence_payload(rep):
    b = rep.bits
    return {
        "formula": rep.formula.value,
        "z": report.cplx(rep.z, b),
        "q": rep.q,
        "samples": [{"N": N, "residual": report.real(r, b)} for N, r in rep.samples],
        "excluded": [{"N": N, "reason": why} for N, why in rep.excluded],
        "fitted_log_rate": report.real(rep.fitted_log_rate, 53),
        "expected_log_rate": report.real(rep.expected_log_rate, 53),
        "rate_rel_error": report.real(rep.rate_rel_error, 53),
    }


def row_payload(row, formula, q):
    b = row.result.bits
    ctx = PrecisionCfg(b).ctx
    cf = row.closed_form
    return {
        "n": row.n,
        "formula": formula.value,
        "q": q,
        "z": report.cplx(row.z, b),
        "closed_form_note": row.note,
        "closed_form_residual": None if cf is None else report.real(abs(row.z.real - cf), b),
        "product": report.cplx(row.result.value, b),
        "terms_used": row.result.terms_used,
        "sinc_ref": report.cplx(ctx.convert(row.sinc), b),
        "residual": report.real(row.residual, b),
    }


def bench_payload(results, seed, samples, target, bits, timing):
    return {
        "seed": seed,
        "samples": samples,
        "target_accuracy": report.real(float(target), 53),
        "timing_included": timing,
        "formulas": [
            {
                "formula": r.formula.value,
                "q": r.q,
                "median_terms": None if r.median_terms is None else report.real(float(r.median_terms), 53),
                "median_seconds_per_eval": (
                    None if r.median_seconds is None else report.real(float(r.median_seconds), 53)
                ),
                "precision_retries": r.precision_retries,
                "unreached": r.unreached,
                "terms": list(r.terms),
            }
            for r in results
        ],
        "precision_bits": bits,
    }


# -- commands -----------------------------------------------------------------

def cmd_eval(args):
    prec = _precision(args)
    formula = Formula.parse(args.formula)
    z = _z(args.z, prec)
    if formula.finite:
        if args.n is None:
            raise UsageError(f"--formula {formula.value} needs --n (and optionally --m)")
        req = ProductRequest(formula, z, q=args.q, m=args.m, n=args.n, prec=prec)
    else:
        if args.terms is None:
            raise UsageError(f"--formula {formula.value} needs --terms")
        req = ProductRequest(formula, z, q=args.q, N=args.terms, prec=prec)
    res = partial_product(req)
    rhs = finite_rhs_log(req) if formula.finite else None
    request = {
        "formula": formula.value, "z": report.cplx(z, prec.bits), "q": req.q,
        "m": req.m if formula.finite else None, "n": req.n, "terms": req.N, "precision_bits": prec.bits,
    }
    payload = eval_payload(res, formula, rhs)
    return EXIT_OK, report.envelope("eval", request, payload), [payload]


def cmd_verify(args):
    prec = _precision(args)
    q_set = tuple(parse_int_list(args.q_set)) if args.q_set else None
    if q_set is not None and any(q < 2 for q in q_set):
        raise UsageError("--q-set values must be >= 2")
    if args.crosscheck:
        try:
            a, b = (Formula.parse(x) for x in args.crosscheck.split(":"))
        except ValueError as exc:
            raise UsageError(f"bad --crosscheck {args.crosscheck!r}") from exc
        re_r, im_r = parse_grid(args.grid or "re=-2:2:9,im=-2:2:9")
        grid = GridSpec(re_r, im_r, q_set or (2, 3))
        try:
            rep = crosscheck_terms(a, b, grid, prec, kmax=args.kmax, tol=args.tol)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        label = f"{a.value}:{b.value}"
    else:
        if not args.formula:
            raise UsageError("verify needs --formula or --crosscheck")
        formula = Formula.parse(args.formula)
        base = default_grid(formula, q_set or (2, 3, 4, 5))
        if args.grid:
            re_r, im_r = parse_grid(args.grid)
        else:
            re_r, im_r = base.re_range, base.im_range
        if args.indices:
            indices = tuple(parse_indices(args.indices))
        elif formula.finite:
            indices = DEFAULT_FINITE_INDICES
        else:
            indices = (None,)
        if formula.finite and any(not isinstance(i, tuple) for i in indices):
            raise UsageError("finite formulas need m:n index specs")
        if not formula.finite and any(isinstance(i, tuple) for i in indices):
            raise UsageError("infinite formulas take integer truncation lengths")
        grid = GridSpec(re_r, im_r, q_set or base.q_set, indices)
        try:
            rep = verify_identity(formula, grid, args.tol, prec, csc_tail=args.csc_tail)
        except IndexOutOfRange as exc:
            raise UsageError(str(exc)) from exc
        label = formula.value
    request = {
        "formula": label, "grid": args.grid, "q_set": list(grid.q_set), "tol": report.real(float(args.tol), 53),
        "precision_bits": prec.bits, "crosscheck": bool(args.crosscheck),
    }
    payload = verification_payload(rep, per_point=args.per_point)
    code = EXIT_FAIL if rep.verdict == "fail" else EXIT_OK
    rows = payload.get("per_point") or [{k: v for k, v in payload.items() if k not in ("skipped", "per_point")}]
    return code, report.envelope("verify", request, payload), rows


def cmd_converge(args):
    prec = _precision(args)
    formula = Formula.parse(args.formula)
    if formula.finite:
        raise UsageError(f"{formula.value} is a finite product")
    z = _z(args.z, prec)
    if args.min_terms < 0 or args.max_terms < args.min_terms:
        raise UsageError("need 0 <= --min-terms <= --max-terms")
    q = 2 if formula in (Formula.VIETE,) else args.q
    rep = fit_rate(formula, z, q, range(args.min_terms, args.max_terms + 1), prec)
    request = {
        "formula": formula.value, "z": report.cplx(z, prec.bits), "q": q,
        "min_terms": args.min_terms, "max_terms": args.max_terms, "precision_bits": prec.bits,
    }
    payload = convergence_payload(rep)
    return EXIT_OK, report.envelope("converge", request, payload), payload["samples"]


def cmd_table(args):
    prec = _precision(args)
    if args.example != 1:
        raise UsageError("only --example 1 is available")
    ns = parse_int_list(args.n)
    if any(n < 2 for n in ns):
        raise UsageError("--n values must be >= 2")
    formula = Formula.parse(args.formula)
    if formula not in (Formula.EXP_TOWER_INF, Formula.RATIO_INF):
        raise UsageError("--formula must be eq8 or eq9")
    rows = [row_payload(example1_row(n, formula, args.terms, prec, q=args.q), formula, args.q) for n in ns]
    request = {
        "example": 1, "n": ns, "formula": formula.value, "q": args.q, "terms": args.terms,
        "precision_bits": prec.bits,
    }
    return EXIT_OK, report.envelope("table", request, {"rows": rows}), rows


def cmd_bench(args):
    prec = _precision(args)
    formulas = [Formula.parse(f) for f in args.formulas.split(",") if f.strip()]
    if not formulas or any(f.finite for f in formulas):
        raise UsageError("--formulas must list infinite products (eq2, eq8, eq9, eq10, eq11)")
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    results = bench_formulas(formulas, args.q, args.target_accuracy, args.samples, prec, args.seed,
                             timing=not args.no_timing)
    request = {
        "formulas": [f.value for f in formulas], "q": args.q,
        "target_accuracy": report.real(float(args.target_accuracy), 53), "samples": args.samples,
        "seed": args.seed, "precision_bits": prec.bits,
    }
    payload = bench_payload(results, args.seed, args.samples, args.target_accuracy, prec.bits, not args.no_timing)
    rows = [{k: v for k, v in f.items() if k != "terms"} for f in payload["formulas"]]
    return EXIT_OK, report.envelope("bench", request, payload), rows


# -- parser -------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--precision", type=int, default=None,
                   help="mantissa bits (default: $TRIGPROD_PRECISION_BITS or 113)")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="trigprod",
        description="Evaluate and certify trigonometric product identities for sinc(z).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one partial product")
    p.add_argument("--formula", required=True, choices=FORMULA_CHOICES)
    p.add_argument("--z", required=True, help='argument as "re" or "re,im" (radians)')
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--terms", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="certify an identity over a grid")
    p.add_argument("--formula", choices=FORMULA_CHOICES)
    p.add_argument("--grid", help='"re=a:b:n,im=a:b:n"')
    p.add_argument("--q-set", dest="q_set", help="comma-separated bases")
    p.add_argument("--indices", help='finite: "m:n,m:n"; infinite: "N,N" (default: from tolerance)')
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--crosscheck", help="eq10:eq9 or eq11:eq9")
    p.add_argument("--kmax", type=int, default=6, help="largest term index for --crosscheck")
    p.add_argument("--csc-tail", action="store_true",
                   help="eq12 only: use csc in place of the trailing cot factor")
    p.add_argument("--per-point", action="store_true", help="include the per-point table")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("converge", help="fit the convergence rate of an infinite product")
    p.add_argument("--formula", required=True, choices=FORMULA_CHOICES)
    p.add_argument("--z", required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--min-terms", type=int, default=2)
    p.add_argument("--max-terms", type=int, default=12)
    _add_common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("table", help="reproduce the nested-radical example table")
    p.add_argument("--example", type=int, default=1)
    p.add_argument("--n", default="2,3,4,5,6")
    p.add_argument("--formula", default="eq9", choices=("eq8", "eq9"))
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--terms", type=int, default=24)
    _add_common(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("bench", help="terms needed per formula to reach a target accuracy")
    p.add_argument("--formulas", default="eq2,eq8,eq9,eq10")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--target-accuracy", type=float, default=1e-12)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--no-timing", action="store_true", help="omit wall-clock timings (byte-stable output)")
    _add_common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def render(env, rows, fmt):
    if fmt == "json":
        return report.to_json(env)
    if fmt == "csv":
        return report.to_csv(rows)
    return report.to_text(env)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, env, rows = args.func(args)
    except UsageError as exc:
        print(f"trigprod: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IndexOutOfRange, UnsupportedFormula) as exc:
        print(f"trigprod: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PoleProximity as exc:
        print(f"trigprod: pole guard: {exc}", file=sys.stderr)
        return EXIT_POLE
    except (ToleranceUnreachable, RangeCapExceeded) as exc:
        print(f"trigprod: limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except InsufficientSamples as exc:
        print(f"trigprod: insufficient samples: {exc}", file=sys.stderr)
        return EXIT_SAMPLES
    except ValueError as exc:
        print(f"trigprod: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(render(env, rows, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
