"""Command line driver.

Three command groups: `coeffs` (tables, with an on-disk cache), `ode`
(operator verification, fitting, Frobenius/Yukawa/Wronskian reports) and
`eval` (numeric evaluation).  Reports are JSON on stdout with sorted
keys; every big integer and every float travels as a decimal string so
nothing is rounded by the transport.  Exit codes: 0 success, 2 a
verification or tolerance failure, 3 a resource limit, 4 a usage error.

Cache files: one per lattice, `<dir>/<family>-<dim>.txt`, a header line
`lgf-cache v1 <family> <dim> <count>` then one decimal integer per line.
Writes go through a temp file and rename, so a reader never sees a
half-written table.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from fractions import Fraction
from math import comb

import mpmath as mp

from . import analytic
from .constant_term import ct_series, kernel
from .errors import (
    DivergentRequest,
    DomainError,
    FitFailure,
    InsufficientTerms,
    LatticeGFError,
    NotMUM,
    NotSymmetricSquare,
    PrecisionNotMet,
    ResourceLimit,
    UnknownOperator,
    UnsupportedLattice,
    UnsupportedTerm,
)
from .lattices import LatticeSpec, coeffs, cosine_integer_table
from .ode import (
    cy_conditions_report,
    fit_minimal_degree,
    fit_ode,
    frobenius,
    parse_operator,
    registry,
    registry_names,
    symmetric_square_check,
    wronskian_cy_check,
    write_operator,
    yukawa,
)
from .series import PowerSeries

OK, FAIL, LIMIT, USAGE = 0, 2, 3, 4

CACHE_MAGIC = "lgf-cache v1"


class UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the exit-code contract wants 4
    def error(self, message):
        raise UsageExit(message)


def _default_prec() -> int:
    raw = os.environ.get("LGF_PREC", "")
    try:
        return max(5, int(raw)) if raw else 30
    except ValueError:
        return 30


def _fstr(v, prec: int) -> str:
    return mp.nstr(mp.mpf(v) if not isinstance(v, mp.mpc) else v, prec)


def _qstr(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _emit(doc: dict, started: float) -> None:
    doc["timing_ms"] = int((time.monotonic() - started) * 1000)
    print(json.dumps(doc, indent=2, sort_keys=True))


# -- cache persistence --------------------------------------------------------

def _cache_path(cache_dir: str, family: str, dim: int) -> str:
    return os.path.join(cache_dir, f"{family}-{dim}.txt")


def read_cache(path: str) -> tuple[str, int, list[int]]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError("empty cache file")
    head = lines[0].split()
    if len(head) != 5 or f"{head[0]} {head[1]}" != CACHE_MAGIC:
        raise ValueError(f"bad cache header {lines[0]!r}")
    family, dim, count = head[2], int(head[3]), int(head[4])
    values = [int(s) for s in lines[1:] if s.strip()]
    if len(values) != count:
        raise ValueError(f"header count {count} != {len(values)} entries")
    return family, dim, values


def write_cache(path: str, family: str, dim: int, values: list[int]) -> None:
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".lgf-tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(f"{CACHE_MAGIC} {family} {dim} {len(values)}\n")
            for v in values:
                fh.write(f"{v}\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- coeffs -------------------------------------------------------------------

_COSINE_NAME = {"square": "square", "sincos4": "sincos4", "triples4": "triples4"}


def _table_by(method: str, spec: LatticeSpec, count: int) -> list[int]:
    if method == "formula":
        return list(coeffs(spec, count - 1).values)
    if method == "ct":
        return ct_series(kernel(spec.family, spec.dim), count - 1)
    if method == "cosine":
        name = _COSINE_NAME.get(spec.family, f"{spec.family}{spec.dim}")
        s = spec.steps_per_index
        engine = cosine_integer_table(name, (count - 1) * s)
        return [engine[s * n] for n in range(count)]
    raise UsageExit(f"unknown method {method!r}")


def cmd_coeffs(args) -> int:
    started = time.monotonic()
    spec = LatticeSpec(args.family, args.dim)
    count = args.terms
    if count < 1:
        raise UsageExit("--terms must be >= 1")

    cpath = _cache_path(args.cache_dir, spec.family, spec.dim) if args.cache_dir else None
    cached: list[int] | None = None
    cache_problem = ""
    if cpath and os.path.exists(cpath):
        try:
            cfam, cdim, cached = read_cache(cpath)
            if (cfam, cdim) != (spec.family, spec.dim):
                raise ValueError(f"cache is for {cfam}-{cdim}")
        except ValueError as exc:
            cached, cache_problem = None, str(exc)

    doc = {"command": "coeffs",
           "inputs": {"family": spec.family, "dim": spec.dim,
                      "terms": count, "method": args.method},
           "passed": True}

    if args.method == "all":
        table = _table_by("formula", spec, count)
        checks = {"formula-vs-ct": table == _table_by("ct", spec, count)}
        if cache_problem:
            checks["cache-readable"] = False
        elif cached is not None:
            k = min(len(cached), count)
            checks["cache-vs-formula"] = cached[:k] == table[:k]
        doc["checks"] = checks
        doc["passed"] = all(checks.values())
        if not doc["passed"]:
            doc["detail"] = cache_problem or "route disagreement"
            _emit(doc, started)
            return FAIL
        if cpath and (cached is None or len(cached) < count):
            write_cache(cpath, spec.family, spec.dim, table)
    else:
        if cached is not None and len(cached) >= count:
            table = cached[:count]
        else:
            table = _table_by(args.method, spec, count)
            if cpath:
                write_cache(cpath, spec.family, spec.dim, table)

    if args.format == "csv":
        print("n,a_n")
        for n, v in enumerate(table):
            print(f"{n},{v}")
        return OK
    doc["table"] = [str(v) for v in table]
    _emit(doc, started)
    return OK


# -- ode ----------------------------------------------------------------------

_SERIES_SPEC = {"bcc4": ("bcc", 4), "sc4": ("sc", 4), "diamond4": ("diamond", 4),
                "fcc4": ("fcc", 4), "sc3": ("sc", 3)}


def _load_operator(args):
    if getattr(args, "op_file", None):
        with open(args.op_file) as fh:
            return parse_operator(fh.read(), note=args.op_file)
    if getattr(args, "name", None):
        return registry(args.name)
    raise UsageExit("give an operator name or --op-file; names: "
                    + ", ".join(registry_names()))


def _series_for(args, op, n_max: int) -> tuple[PowerSeries, str]:
    if getattr(args, "series_cache", None):
        _, _, values = read_cache(args.series_cache)
        if len(values) < n_max + 1:
            raise UsageExit(f"cache holds {len(values)} terms, need {n_max + 1}")
        return PowerSeries(values[: n_max + 1]), "cache"
    if getattr(args, "family", None):
        spec = LatticeSpec(args.family, args.dim)
        return PowerSeries(list(coeffs(spec, n_max).values)), "table"
    name = getattr(args, "name", None)
    if name in _SERIES_SPEC:
        fam, d = _SERIES_SPEC[name]
        return PowerSeries(list(coeffs(LatticeSpec(fam, d), n_max).values)), "table"
    if name and name.startswith("iwan"):
        d = int(name[4:])
        return PowerSeries([comb(2 * n, n) ** d for n in range(n_max + 1)]), "table"
    # triple operators and file operators: the recurrence's own solution
    return op.series_solution(n_max), "recurrence"


def cmd_ode_verify(args) -> int:
    started = time.monotonic()
    op = _load_operator(args)
    series, source = _series_for(args, op, args.terms)
    rep = op.annihilates(series)
    doc = {"command": "ode-verify",
           "inputs": {"operator": args.name or args.op_file, "terms": args.terms,
                      "series_source": source},
           "order": op.order, "degree": op.degree,
           "passed": rep.passed, "detail": rep.note}
    _emit(doc, started)
    return OK if rep.passed else FAIL


def cmd_ode_fit(args) -> int:
    started = time.monotonic()
    series, source = _series_for(args, None, args.terms)
    if args.degree is not None:
        op = fit_ode(series, args.order, args.degree)
        if op is None:
            doc = {"command": "ode-fit", "passed": False,
                   "detail": f"no order-{args.order} degree-{args.degree} annihilator"}
            _emit(doc, started)
            return FAIL
    else:
        op = fit_minimal_degree(series, args.order, args.max_degree)
    text = write_operator(op)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    doc = {"command": "ode-fit",
           "inputs": {"order": args.order, "terms": args.terms,
                      "series_source": source},
           "order": op.order, "degree": op.degree,
           "operator": text.splitlines(), "passed": True}
    _emit(doc, started)
    return OK


def cmd_ode_frobenius(args) -> int:
    started = time.monotonic()
    op = _load_operator(args)
    basis = frobenius(op, args.terms)
    sols = [{"log_degree": y.log_degree,
             "parts": [[_qstr(c) for c in p.coeffs] for p in y.parts]}
            for y in basis]
    doc = {"command": "ode-frobenius",
           "inputs": {"operator": args.name or args.op_file, "terms": args.terms},
           "solutions": sols, "passed": True}
    _emit(doc, started)
    return OK


def cmd_ode_yukawa(args) -> int:
    started = time.monotonic()
    op = _load_operator(args)
    yk = yukawa(op, args.terms, depth=args.depth)
    doc = {"command": "ode-yukawa",
           "inputs": {"operator": args.name or args.op_file, "terms": args.terms},
           "K_coeffs": [_qstr(c) for c in yk.K_coeffs],
           "instantons": [_qstr(v) for v in yk.instantons],
           "scaled_instantons": [_qstr(yk.s * v) for v in yk.instantons],
           "s": yk.s, "passed": True}
    _emit(doc, started)
    return OK


def cmd_ode_cy_report(args) -> int:
    started = time.monotonic()
    op = _load_operator(args)
    reports = cy_conditions_report(op, args.terms)
    doc = {"command": "ode-cy-report",
           "inputs": {"operator": args.name or args.op_file, "terms": args.terms},
           "conditions": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                          for r in reports],
           "passed": all(r.passed for r in reports)}
    _emit(doc, started)
    return OK if doc["passed"] else FAIL


def cmd_ode_wronskian(args) -> int:
    started = time.monotonic()
    op = _load_operator(args)
    rep = wronskian_cy_check(op, args.terms)
    doc = {"command": "ode-wronskian",
           "inputs": {"operator": args.name or args.op_file, "terms": args.terms},
           "passed": rep.passed, "detail": rep.note}
    _emit(doc, started)
    return OK if rep.passed else FAIL


def cmd_ode_symsq(args) -> int:
    started = time.monotonic()
    op = _load_operator(args)
    try:
        P, Qf, rep = symmetric_square_check(op)
    except ValueError as exc:
        raise UsageExit(str(exc)) from None
    except NotSymmetricSquare as exc:
        doc = {"command": "ode-symsq",
               "inputs": {"operator": args.name or args.op_file},
               "passed": False, "detail": str(exc)}
        _emit(doc, started)
        return FAIL
    doc = {"command": "ode-symsq",
           "inputs": {"operator": args.name or args.op_file},
           "P": repr(P), "Q": repr(Qf),
           "passed": rep.passed, "detail": rep.note}
    _emit(doc, started)
    return OK if rep.passed else FAIL


# -- eval ---------------------------------------------------------------------

def cmd_eval_lgf(args) -> int:
    started = time.monotonic()
    spec = LatticeSpec(args.family, args.dim)
    tail = "power-law-corrected" if args.tail == "corrected" else "none"
    r = analytic.lgf_series_eval(spec, args.z, args.prec, terms=args.terms, tail=tail)
    doc = {"command": "eval-lgf",
           "inputs": {"family": spec.family, "dim": spec.dim, "z": args.z,
                      "tail": args.tail, "prec": args.prec},
           "value": _fstr(r.value, args.prec),
           "error_bound": _fstr(r.error, 3),
           "terms_used": r.terms_used, "note": r.note, "passed": True}
    _emit(doc, started)
    return OK


def cmd_eval_watson(args) -> int:
    started = time.monotonic()
    v = analytic.watson(args.lattice, args.prec)
    doc = {"command": "eval-watson", "inputs": {"lattice": args.lattice,
                                                "prec": args.prec},
           "value": _fstr(v, args.prec), "passed": True}
    _emit(doc, started)
    return OK


def cmd_eval_ramanujan(args) -> int:
    started = time.monotonic()
    partial, target, err = analytic.ramanujan_eval(args.id, args.terms, args.prec)
    doc = {"command": "eval-ramanujan",
           "inputs": {"id": args.id, "terms": args.terms, "prec": args.prec},
           "partial_sum": _fstr(partial, args.prec),
           "target": _fstr(target, args.prec),
           "abs_error": _fstr(err, 3), "passed": True}
    _emit(doc, started)
    return OK


def cmd_eval_bessel(args) -> int:
    started = time.monotonic()
    doc = {"command": "eval-bessel",
           "inputs": {"check": args.check, "d": args.d, "z": args.z,
                      "prec": args.prec}}
    if args.check == "abel":
        reports = analytic.abel_forward_check(args.d, args.z, args.prec)
        doc["conditions"] = [{"name": r.name, "passed": r.passed, "detail": r.detail}
                             for r in reports]
        doc["passed"] = all(r.passed for r in reports)
    else:
        fn = {"sc": analytic.bessel_sc_check,
              "diamond": analytic.bessel_diamond_check,
              "connection": analytic.bessel_connection_check}[args.check]
        c = fn(args.d, args.z, args.prec)
        doc["lhs"] = _fstr(c.lhs, args.prec)
        doc["rhs"] = _fstr(c.rhs, args.prec)
        doc["tolerance"] = _fstr(c.error, 3)
        doc["passed"] = bool(c)
    _emit(doc, started)
    return OK if doc["passed"] else FAIL


def cmd_eval_mahler(args) -> int:
    started = time.monotonic()
    try:
        raw = json.loads(args.coeffs)
        F = {tuple(int(p) for p in k.split(",")): v for k, v in raw.items()}
    except (ValueError, AttributeError) as exc:
        raise UsageExit(f"--coeffs wants JSON like '{{\"1,0\": 1}}': {exc}") from None
    v, err = analytic.log_mahler_measure(F, args.prec)
    doc = {"command": "eval-mahler", "inputs": {"coeffs": raw, "prec": args.prec},
           "value": _fstr(v, args.prec), "error_bound": _fstr(err, 3),
           "passed": True}
    _emit(doc, started)
    return OK


def cmd_eval_maps(args) -> int:
    started = time.monotonic()
    z, v = analytic.honeycomb_map_eval(args.target, args.xi, args.prec)
    doc = {"command": "eval-maps",
           "inputs": {"target": args.target, "xi": args.xi, "prec": args.prec},
           "z": {"re": _fstr(mp.re(z), args.prec), "im": _fstr(mp.im(z), args.prec)},
           "value": _fstr(v, args.prec), "passed": True}
    _emit(doc, started)
    return OK


def cmd_eval_return_prob(args) -> int:
    started = time.monotonic()
    spec = LatticeSpec(args.family, args.dim)
    v = analytic.return_probability(spec, args.prec)
    doc = {"command": "eval-return-prob",
           "inputs": {"family": spec.family, "dim": spec.dim, "prec": args.prec},
           "value": _fstr(v, args.prec), "passed": True}
    _emit(doc, started)
    return OK


# -- wiring -------------------------------------------------------------------

def _add_op_args(p, with_series=False, terms_default=40):
    p.add_argument("name", nargs="?", help="registry operator name")
    p.add_argument("--op-file", help="operator exchange file")
    p.add_argument("--terms", type=int, default=terms_default)
    if with_series:
        p.add_argument("--family")
        p.add_argument("--dim", type=int, default=0)
        p.add_argument("--series-cache", help="cache file supplying the series")


def build_parser() -> _Parser:
    prec = _default_prec()
    top = _Parser(prog="lgf", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="group", required=True)

    pc = sub.add_parser("coeffs", help="walk-count tables")
    pc.add_argument("--family", required=True)
    pc.add_argument("--dim", type=int, required=True)
    pc.add_argument("--terms", type=int, default=10)
    pc.add_argument("--method", choices=["formula", "ct", "cosine", "all"],
                    default="formula")
    pc.add_argument("--format", choices=["json", "csv"], default="json")
    pc.add_argument("--cache-dir")
    pc.set_defaults(func=cmd_coeffs)

    po = sub.add_parser("ode", help="operator checks and fits")
    osub = po.add_subparsers(dest="action", required=True)
    pv = osub.add_parser("verify")
    _add_op_args(pv, with_series=True)
    pv.set_defaults(func=cmd_ode_verify)
    pf = osub.add_parser("fit")
    pf.add_argument("--family")
    pf.add_argument("--dim", type=int, default=0)
    pf.add_argument("--series-cache")
    pf.add_argument("--terms", type=int, default=60)
    pf.add_argument("--order", type=int, required=True)
    pf.add_argument("--degree", type=int)
    pf.add_argument("--max-degree", type=int, default=8)
    pf.add_argument("--out", help="write the operator exchange file here")
    pf.set_defaults(func=cmd_ode_fit)
    pb = osub.add_parser("frobenius")
    _add_op_args(pb, terms_default=12)
    pb.set_defaults(func=cmd_ode_frobenius)
    py = osub.add_parser("yukawa")
    _add_op_args(py, terms_default=30)
    py.add_argument("--depth", type=int, default=6)
    py.set_defaults(func=cmd_ode_yukawa)
    pr = osub.add_parser("cy-report")
    _add_op_args(pr, terms_default=32)
    pr.set_defaults(func=cmd_ode_cy_report)
    pw = osub.add_parser("wronskian")
    _add_op_args(pw, terms_default=25)
    pw.set_defaults(func=cmd_ode_wronskian)
    ps = osub.add_parser("symsq")
    _add_op_args(ps)
    ps.set_defaults(func=cmd_ode_symsq)

    pe = sub.add_parser("eval", help="numeric evaluation")
    esub = pe.add_subparsers(dest="action", required=True)
    el = esub.add_parser("lgf")
    el.add_argument("--family", required=True)
    el.add_argument("--dim", type=int, required=True)
    el.add_argument("--z", required=True)
    el.add_argument("--tail", choices=["none", "corrected"], default="none")
    el.add_argument("--terms", type=int)
    el.add_argument("--prec", type=int, default=prec)
    el.set_defaults(func=cmd_eval_lgf)
    ew = esub.add_parser("watson")
    ew.add_argument("--lattice", required=True)
    ew.add_argument("--prec", type=int, default=prec)
    ew.set_defaults(func=cmd_eval_watson)
    er = esub.add_parser("ramanujan")
    er.add_argument("--id", required=True)
    er.add_argument("--terms", type=int, default=50)
    er.add_argument("--prec", type=int, default=prec)
    er.set_defaults(func=cmd_eval_ramanujan)
    eb = esub.add_parser("bessel")
    eb.add_argument("--check", choices=["sc", "diamond", "connection", "abel"],
                    required=True)
    eb.add_argument("--d", type=int, default=3)
    eb.add_argument("--z", required=True)
    eb.add_argument("--prec", type=int, default=min(prec, 16))
    eb.set_defaults(func=cmd_eval_bessel)
    em = esub.add_parser("mahler")
    em.add_argument("--coeffs", required=True,
                    help='JSON exponent->coeff map, e.g. \'{"1,0": 1, "-1,0": 1}\'')
    em.add_argument("--prec", type=int, default=min(prec, 20))
    em.set_defaults(func=cmd_eval_mahler)
    ep = esub.add_parser("maps")
    ep.add_argument("--target", required=True)
    ep.add_argument("--xi", required=True)
    ep.add_argument("--prec", type=int, default=prec)
    ep.set_defaults(func=cmd_eval_maps)
    eq = esub.add_parser("return-prob")
    eq.add_argument("--family", required=True)
    eq.add_argument("--dim", type=int, required=True)
    eq.add_argument("--prec", type=int, default=prec)
    eq.set_defaults(func=cmd_eval_return_prob)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageExit as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return LIMIT
    except (UnsupportedLattice, UnsupportedTerm, UnknownOperator, DomainError,
            DivergentRequest, InsufficientTerms) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE
    except (FitFailure, NotSymmetricSquare, NotMUM, PrecisionNotMet) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return FAIL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return USAGE
    except LatticeGFError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
