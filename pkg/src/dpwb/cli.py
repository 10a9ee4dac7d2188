"""The ``wb`` command line tool.

Subcommands: parse | eval | enumerate | integrate | transfer | bound | zsum.
Every run emits a JSON report envelope echoing the full effective
configuration; identical inputs produce byte-identical reports (wall time
is logged to stderr, never into the report).  Exit codes: 0 success,
1 input error, 2 resource or budget error, 3 the tool worked but the
outcome is inconclusive (Unknown verdicts, uninformative experiments).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__
from . import syntax as sx
from .errors import (BudgetError, InputError, ResourceError, WorkbenchError)
from .integrate import integrate, vf_ring_domain
from .localfield import FieldDesc, RFElem, VFElem, embed_constant, parse_element_literal
from .motivic import parse_motivic_file
from .rootsum import RootSum
from .semantics import (DefinableSet, SearchBox, TruthVal, enumerate_set,
                        eval_formula, find_witnesses)
from .transfer import parse_statement_file, transfer_experiment, uniform_bound_fit
from .zsums import parse_tsum, tsum_bound, tsum_eval

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_RESOURCE = 2
EXIT_INCONCLUSIVE = 3


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _json_default(o):
    if isinstance(o, Fraction):
        return {"rational": f"{o.numerator}/{o.denominator}", "float": float(o)}
    if isinstance(o, RootSum):
        z = o.to_complex()
        return {"cyclotomic": {"p": o.p, "k": o.k,
                               "terms": [[e, f"{c.numerator}/{c.denominator}"]
                                         for e, c in o.coeffs]},
                "re": z.real, "im": z.imag}
    if isinstance(o, VFElem):
        return o.to_literal()
    if isinstance(o, RFElem):
        return {"rf": o.value, "p": o.p}
    if isinstance(o, TruthVal):
        return o.value
    if isinstance(o, sx.Sort):
        return o.value
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _envelope(config: dict, result: dict) -> dict:
    return {"tool": "wb", "version": __version__, "config": config,
            "result": result, "wall_time_ms": None}


def _error_json(exc: Exception) -> None:
    sys.stderr.write(json.dumps(
        {"error": {"type": type(exc).__name__, "message": str(exc)}},
        sort_keys=True, default=_json_default) + "\n")


# ---------------------------------------------------------------------------
# shared argument plumbing
# ---------------------------------------------------------------------------

def _add_box_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--vrange", default="-2:6", help="valuation window lo:hi")
    p.add_argument("--depth", type=int, default=2, help="digits fixed per cell")
    p.add_argument("--zwindow", default="-10:10", help="value-group window lo:hi")


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise InputError(f"malformed range {text!r}; expected lo:hi")


def _box_of(args) -> SearchBox:
    vmin, vmax = _parse_range(args.vrange)
    zmin, zmax = _parse_range(args.zwindow)
    return SearchBox(vmin, vmax, args.depth, zmin, zmax)


def _field_of(args) -> FieldDesc:
    spec = args.field
    fam, _, p = spec.partition(":")
    if not p:
        raise InputError(f"malformed field spec {spec!r}; expected Qp:5 or FpT:5")
    return FieldDesc(fam, int(p), args.precision)


def _budget(args) -> int | None:
    env = os.environ.get("WB_BUDGET_CELLS")
    if getattr(args, "budget", None) is not None:
        return args.budget
    return int(env) if env else 2_000_000


def _box_config(args) -> dict:
    return {"vrange": args.vrange, "depth": args.depth, "zwindow": args.zwindow}


def _load_formula(spec: str):
    """FILE or FILE:NAME -> (FormulaFile, name, formula)."""
    path, _, name = spec.partition(":")
    with open(path) as fh:
        ff = sx.parse_formula_file(fh.read())
    if not ff.formulas:
        raise InputError(f"{path} declares no formulas")
    if not name:
        if len(ff.formulas) > 1:
            raise InputError(f"{path} has several formulas; use FILE:NAME")
        name = next(iter(ff.formulas))
    if name not in ff.formulas:
        raise InputError(f"no formula {name!r} in {path}")
    return ff, name, ff.formulas[name]


def _parse_assignment(pairs: list[str], fd: FieldDesc,
                      declared: dict[str, sx.Sort]) -> dict:
    """Assignments like x=Qp(5){v=0;7}, x=0!, z=5, u=rf:3; a bare integer is
    read according to the declared sort of the variable."""
    out = {}
    for pair in pairs:
        name, eq, val = pair.partition("=")
        name = name.strip()
        val = val.strip()
        if not eq:
            raise InputError(f"malformed assignment {pair!r}")
        if val == "0!":
            from .localfield import vf_zero
            out[name] = vf_zero(fd)
        elif val.startswith(("Qp(", "FpT(")):
            out[name] = parse_element_literal(val, fd=fd)
        elif val.startswith("rf:"):
            out[name] = RFElem(int(val[3:]), fd.p)
        else:
            sort = declared.get(name)
            if sort is sx.Sort.VF:
                out[name] = embed_constant(fd, int(val))
            elif sort is sx.Sort.RF:
                out[name] = RFElem(int(val), fd.p)
            else:
                out[name] = int(val)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_parse(args) -> int:
    with open(args.file) as fh:
        ff = sx.parse_formula_file(fh.read())
    names = [args.name] if args.name else sorted(ff.formulas)
    result = {"formulas": []}
    for name in names:
        if name not in ff.formulas:
            raise InputError(f"no formula {name!r} in {args.file}")
        f = ff.formulas[name]
        sig = sx.typecheck(f, ff.declared)
        result["formulas"].append({
            "name": name,
            "text": sx.format_formula(f),
            "signature": {"n": sig.n, "m": sig.m, "r": sig.r,
                          "vars": [{"name": v, "sort": s} for v, s in sig.free]},
        })
    _emit(_envelope({"file": args.file, "name": args.name}, result), args.out)
    return EXIT_OK


def _cmd_eval(args) -> int:
    fd = _field_of(args)
    box = _box_of(args)
    ff, name, formula = _load_formula(args.formula)
    assign = _parse_assignment(args.assign or [], fd, ff.declared)
    diagnostics: list[str] = []
    verdict = eval_formula(fd, box, assign, formula, diagnostics)
    witnesses = find_witnesses(fd, box, assign, formula) \
        if verdict is TruthVal.TRUE else []
    result = {"formula": name, "field": str(fd), "box": _box_config(args),
              "verdict": verdict, "witnesses": witnesses,
              "diagnostics": diagnostics}
    _emit(_envelope({"field": args.field, "precision": args.precision,
                     "formula": args.formula, "assign": args.assign or [],
                     **_box_config(args)}, result), args.out)
    return EXIT_INCONCLUSIVE if verdict is TruthVal.UNKNOWN else EXIT_OK


def _cmd_enumerate(args) -> int:
    fd = _field_of(args)
    box = _box_of(args)
    ff, name, formula = _load_formula(args.formula)
    dset = DefinableSet.make(formula, ff.declared)
    fixed = _parse_assignment(args.assign or [], fd, ff.declared)
    enum = enumerate_set(fd, box, dset, fixed=fixed, budget=_budget(args))
    result = {"formula": name, "field": str(fd), "vars": list(enum.varnames),
              "true": enum.true, "unknown": enum.unknown,
              "true_count": len(enum.true), "unknown_count": len(enum.unknown)}
    _emit(_envelope({"field": args.field, "formula": args.formula,
                     "assign": args.assign or [], **_box_config(args)},
                    result), args.out)
    return EXIT_OK


def _domain_of(args, mfile, fn) -> DefinableSet:
    if args.domain == "O":
        vf_vars = sorted(n for n, s in mfile.declared.items() if s is sx.Sort.VF)
        if not vf_vars:
            raise InputError("--domain O needs VF variables declared in the file")
        return vf_ring_domain(vf_vars)
    if os.path.exists(args.domain.partition(":")[0]):
        ff, _, formula = _load_formula(args.domain)
        return DefinableSet.make(formula, {**ff.declared, **mfile.declared})
    return DefinableSet.make(args.domain, dict(mfile.declared))


def _cmd_integrate(args) -> int:
    fd = _field_of(args)
    box = _box_of(args)
    with open(args.file) as fh:
        mfile = parse_motivic_file(fh.read())
    name = args.function
    if not name:
        names = sorted(mfile.motivic) + sorted(mfile.exp)
        if len(names) != 1:
            raise InputError("file has several functions; use --function NAME")
        name = names[0]
    fn = mfile.function(name)
    domain = _domain_of(args, mfile, fn)
    r = integrate(fd, fn, domain, box, depth=args.depth, twist=args.twist,
                  budget=_budget(args))
    result = {
        "function": name, "field": str(fd), "domain": args.domain,
        "value": r.value, "exact": r.exact, "tail_status": r.tail,
        "float_value": r.float_value, "cells": r.cells_used,
        "unknown_mass": r.unknown_mass,
        "increments": [_json_default(x) if isinstance(x, (Fraction, RootSum)) else x
                       for x in r.increments],
        "ratio": r.ratio,
    }
    _emit(_envelope({"field": args.field, "file": args.file, "function": name,
                     "domain": args.domain, "twist": args.twist,
                     **_box_config(args)}, result), args.out)
    return EXIT_OK


def _cmd_transfer(args) -> int:
    with open(args.file) as fh:
        sfile = parse_statement_file(fh.read())
    primes = [int(s) for s in args.primes.split(",")]
    box = _box_of(args)
    names = [args.statement] if args.statement else sorted(sfile.statements)
    reports = []
    any_informative = False
    for name in names:
        if name not in sfile.statements:
            raise InputError(f"no statement {name!r} in {args.file}")
        rep = transfer_experiment(sfile.statements[name], primes, box,
                                  depth=args.depth)
        any_informative |= not rep.uninformative
        reports.append(rep)
    result = {"reports": reports}
    _emit(_envelope({"file": args.file, "statement": args.statement,
                     "primes": args.primes, **_box_config(args)},
                    result), args.out)
    if args.csv:
        lines = ["statement,p,qp,fpt,agree"]
        for rep in reports:
            for row in rep.rows:
                cell = lambda v: "" if v is None else str(v)
                lines.append(f"{rep.statement},{row.p},{cell(row.qp)},"
                             f"{cell(row.fpt)},{cell(row.agree)}")
        with open(args.csv, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return EXIT_OK if any_informative else EXIT_INCONCLUSIVE


def _cmd_bound(args) -> int:
    with open(args.file.partition(":")[0]) as fh:
        sfile = parse_statement_file(fh.read())
    name = args.file.partition(":")[2] or None
    if name is None:
        if len(sfile.functions) != 1:
            raise InputError("file has several functions; use FILE:NAME")
        name = next(iter(sfile.functions))
    fn = sfile.functions[name]
    lam = [s for s in (args.lam or "").split(",") if s]
    fields = []
    for spec in args.fields.split(","):
        fam, _, p = spec.partition(":")
        fields.append(FieldDesc(fam, int(p), args.precision))
    if args.domain:
        domain = DefinableSet.make(args.domain, dict(sfile.declared))
    else:
        from .integrate import full_domain
        domain = full_domain({n: s for n, s in sfile.declared.items()})
    windows = tuple(int(s) for s in args.windows.split(","))
    box = _box_of(args)
    fit = uniform_bound_fit(fn, domain, lam, fields, box, windows=windows,
                            depth=args.depth)
    result = {"function": name, "ok": fit.ok, "a": fit.a, "b": fit.b,
              "record": fit.record}
    _emit(_envelope({"file": args.file, "lambda": args.lam,
                     "fields": args.fields, "windows": args.windows,
                     "domain": args.domain, **_box_config(args)},
                    result), args.out)
    if fit.ok or "hypothesis_violation" in fit.record:
        return EXIT_OK
    return EXIT_INCONCLUSIVE


def _cmd_zsum(args) -> int:
    text = args.tsum
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read().strip()
    h = parse_tsum(text)
    result: dict = {"tsum": h.render(), "vars": list(h.varnames)}
    code = EXIT_OK
    if args.eval:
        assigns = dict(kv.split("=", 1) for kv in args.eval)
        q = int(assigns.pop("q"))
        point = tuple(int(assigns[v]) for v in h.varnames)
        result["eval"] = {"q": q, "point": point, "value": tsum_eval(h, q, point)}
    if args.bound:
        cert = tsum_bound(h, q0=args.q0)
        if cert is None:
            result["bound"] = None
            code = EXIT_INCONCLUSIVE
        else:
            result["bound"] = {
                "a": cert.a, "b": cert.b, "certified": cert.certified,
                "q0": cert.q0, "components": cert.components,
                "a_witness": cert.a_witness, "b_witness": cert.b_witness,
                "b_argument": cert.b_argument,
                "dominance_thresholds": cert.dominance_thresholds,
                "notes": cert.notes,
            }
    _emit(_envelope({"tsum": args.tsum, "eval": args.eval, "bound": args.bound,
                     "q0": args.q0}, result), args.out)
    return code


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wb",
        description="workbench for three-sorted valued-field logic and "
                    "motivic exponential functions")
    ap.add_argument("--version", action="version", version=f"wb {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, box=True, field=False):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        if box:
            _add_box_args(p)
        if field:
            p.add_argument("--field", required=True, help="Qp:5 or FpT:5")
            p.add_argument("--precision", type=int, default=12,
                           help="stored expansion digits N")

    p = sub.add_parser("parse", help="parse and sort-check a formula file")
    p.add_argument("file")
    p.add_argument("--name", help="only this formula")
    common(p, box=False)
    p.set_defaults(fn=_cmd_parse)

    p = sub.add_parser("eval", help="evaluate a formula at an assignment")
    p.add_argument("--formula", required=True, metavar="FILE[:NAME]")
    p.add_argument("--assign", action="append", metavar="x=VALUE")
    common(p, field=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("enumerate", help="list the box points of a definable set")
    p.add_argument("--formula", required=True, metavar="FILE[:NAME]")
    p.add_argument("--assign", action="append", metavar="x=VALUE")
    p.add_argument("--budget", type=int)
    common(p, field=True)
    p.set_defaults(fn=_cmd_enumerate)

    p = sub.add_parser("integrate", help="integrate a motivic function")
    p.add_argument("file", help="motivic function file")
    p.add_argument("--function", help="name within the file")
    p.add_argument("--domain", required=True,
                   help="O, a formula, or FILE[:NAME]")
    p.add_argument("--twist", type=int, default=1)
    p.add_argument("--budget", type=int)
    common(p, field=True)
    p.set_defaults(fn=_cmd_integrate)

    p = sub.add_parser("transfer", help="run a cross-characteristic experiment")
    p.add_argument("file", help="statement file")
    p.add_argument("--statement", help="name within the file")
    p.add_argument("--primes", default="5,7,11,13")
    p.add_argument("--csv", help="also write a CSV verdict matrix here")
    common(p)
    p.set_defaults(fn=_cmd_transfer)

    p = sub.add_parser("bound", help="fit uniform bound exponents (a, b)")
    p.add_argument("file", metavar="FILE[:NAME]", help="statement/motivic file")
    p.add_argument("--lam", "--lambda", dest="lam", help="comma-separated ZZ vars")
    p.add_argument("--fields", default="Qp:5,FpT:7")
    p.add_argument("--precision", type=int, default=12)
    p.add_argument("--windows", default="8,16,32")
    p.add_argument("--domain")
    common(p)
    p.set_defaults(fn=_cmd_bound)

    p = sub.add_parser("zsum", help="evaluate or bound a q-power term sum")
    p.add_argument("tsum", help="term-sum text or a file containing one")
    p.add_argument("--eval", nargs="+", metavar="k=v",
                   help="q=.. plus one value per variable")
    p.add_argument("--bound", action="store_true")
    p.add_argument("--q0", type=int, default=2)
    common(p, box=False)
    p.set_defaults(fn=_cmd_zsum)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    t0 = time.monotonic()
    try:
        code = args.fn(args)
    except (BudgetError, ResourceError) as e:
        _error_json(e)
        return EXIT_RESOURCE
    except (WorkbenchError, OSError, ValueError) as e:
        _error_json(e)
        return EXIT_INPUT
    finally:
        sys.stderr.write(f"wall_time_ms: {int((time.monotonic() - t0) * 1000)}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
