"""Cross-characteristic experiment harness.

A statement (integrability, boundedness, an explicit q^(a+b||lambda||)
bound, or the truth of a closed formula) is decided over Q_p and over
F_p((t)) for a list of primes and a set of character twists, and the
verdicts are compared.  Only definite verdicts enter the agreement
statistics; Unknown and Inconclusive outcomes are flagged and excluded
rather than coerced.  The threshold "from which prime onward everything
agrees" is an output of the experiment, never an input assumption.

uniform_bound_fit looks for the least integers (b, then a) with
|f(w, lambda)| <= p^(a + b ||lambda||) across every tested field and
window, where ||lambda|| is the sum of absolute values.  The least b is
the one whose fitted a stabilizes as the lambda-window grows; boundedness
in w is probed first, and observed growth in w is reported as a hypothesis
violation instead of a fit.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import syntax as sx
from .errors import FormulaSyntaxError, InputError
from .localfield import FieldDesc
from .motivic import (MotivicExpFunction, MotivicFunction, _parse_block, _Scanner,
                      eval_exp, eval_motivic)
from .semantics import (DefinableSet, SearchBox, TruthVal, enumerate_set,
                        eval_formula)
from .integrate import check_bounded, check_integrable


@dataclass(frozen=True)
class StatementSpec:
    name: str
    kind: str  # "integrability" | "boundedness" | "bound" | "truth"
    function: MotivicFunction | MotivicExpFunction | None = None
    domain: DefinableSet | None = None
    formula: DefinableSet | None = None
    bound_a: int = 0
    bound_b: int = 0
    lambda_vars: tuple[str, ...] = ()
    twists: tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.kind not in ("integrability", "boundedness", "bound", "truth"):
            raise InputError(f"unknown statement kind {self.kind!r}")
        if self.kind == "truth":
            if self.formula is None:
                raise InputError("truth statements need a formula")
            if self.formula.signature.free:
                raise InputError("truth statements must be closed formulas")
        elif self.function is None or self.domain is None:
            raise InputError(f"{self.kind} statements need function and domain")


@dataclass
class TransferRow:
    p: int
    qp: bool | None
    fpt: bool | None
    agree: bool | None
    evidence: dict


@dataclass
class TransferReport:
    statement: str
    kind: str
    rows: list[TransferRow] = field(default_factory=list)
    stable_from: int | None = None
    disagreements: list[dict] = field(default_factory=list)
    uninformative: bool = False

    def all_agree(self) -> bool:
        return not self.disagreements


def _decide(stmt: StatementSpec, fd: FieldDesc, box: SearchBox,
            depth: int | None, twist: int) -> tuple[bool | None, dict]:
    """One (field, twist) verdict with its evidence."""
    if stmt.kind == "truth":
        v = eval_formula(fd, box, {}, stmt.formula)
        return ({TruthVal.TRUE: True, TruthVal.FALSE: False,
                 TruthVal.UNKNOWN: None}[v], {"verdict": v.value})
    if stmt.kind == "integrability":
        r = check_integrable(fd, stmt.function, stmt.domain, box, depth, twist=twist)
        verdict = {"LikelyIntegrable": True, "LikelyDivergent": False,
                   "Inconclusive": None}[r.kind]
        return verdict, {"kind": r.kind, "detail": r.detail,
                         "increments": r.increments}
    if stmt.kind == "boundedness":
        r = check_bounded(fd, stmt.function, stmt.domain, box, depth, twist=twist)
        return (r.verdict == "bounded",
                {"verdict": r.verdict, "sup": float(r.sup),
                 "shell_maxima": r.shell_maxima})
    # explicit bound with exponents (a, b) over the tested window
    worst = None
    holds = True
    enum = enumerate_set(fd, box, stmt.domain)
    p = Fraction(fd.p)
    for env in enum.true_dicts():
        val = _abs_value(fd, box, stmt.function, env, twist)
        norm = sum(abs(env[n]) for n in stmt.lambda_vars)
        bound = p ** (stmt.bound_a + stmt.bound_b * norm)
        if val > bound:
            holds = False
        slack = float(val) / float(bound) if bound else float("inf")
        if worst is None or slack > worst[0]:
            worst = (slack, {k: str(v) for k, v in env.items()})
    return holds, {"holds": holds, "worst_slack": worst[0] if worst else None,
                   "worst_point": worst[1] if worst else None}


def _abs_value(fd, box, f, env, twist):
    if isinstance(f, MotivicExpFunction):
        return abs(eval_exp(fd, box, f, env, twist))
    return abs(eval_motivic(fd, box, f, env))


def _aggregate(per_twist: dict[int, bool | None]) -> bool | None:
    """Truth of "for every sampled character": false wins, unknown blocks."""
    if any(v is False for v in per_twist.values()):
        return False
    if any(v is None for v in per_twist.values()):
        return None
    return True


def transfer_experiment(stmt: StatementSpec, primes: list[int], box: SearchBox,
                        depth: int | None = None, N: int = 12) -> TransferReport:
    """Decide the statement over both field families for each prime and twist."""
    if any(p < 3 for p in primes):
        raise InputError("transfer experiments use odd primes (p >= 3)")
    report = TransferReport(stmt.name, stmt.kind)
    for p in sorted(primes):
        evidence: dict = {}
        verdicts: dict[str, bool | None] = {}
        for family in ("Qp", "FpT"):
            fd = FieldDesc(family, p, N)
            per_twist: dict[int, bool | None] = {}
            for twist in stmt.twists:
                v, ev = _decide(stmt, fd, box, depth, twist % p if twist % p else 1)
                per_twist[twist] = v
                evidence[f"{family}:twist{twist}"] = ev
            verdicts[family] = _aggregate(per_twist)
        qp, fpt = verdicts["Qp"], verdicts["FpT"]
        agree = None if (qp is None or fpt is None) else (qp == fpt)
        report.rows.append(TransferRow(p, qp, fpt, agree, evidence))
        if agree is False:
            report.disagreements.append({
                "p": p, "Qp": qp, "FpT": fpt, "evidence": evidence})
    definite = [r for r in report.rows if r.agree is not None]
    report.uninformative = not definite
    for row in report.rows:
        if all(r.agree for r in report.rows if r.p >= row.p and r.agree is not None) \
                and row.agree is not None:
            report.stable_from = row.p
            break
    return report


# ---------------------------------------------------------------------------
# uniform bound fitting
# ---------------------------------------------------------------------------

@dataclass
class FitResult:
    ok: bool
    a: int | None = None
    b: int | None = None
    record: dict = field(default_factory=dict)


def _min_exponent(p: int, val, b: int, norm: int) -> int:
    """Least a with val <= p^(a + b*norm)."""
    a = -b * norm
    pf = Fraction(p)
    while pf ** (a + b * norm) < val:
        a += 1
    while a - 1 + b * norm > -64 and pf ** (a - 1 + b * norm) >= val:
        a -= 1
    return a


def uniform_bound_fit(f: MotivicFunction | MotivicExpFunction,
                      domain: DefinableSet, lambda_vars: list[str],
                      fields: list[FieldDesc], box: SearchBox,
                      windows: tuple[int, ...] = (8, 16, 32),
                      depth: int | None = None, twists: tuple[int, ...] = (1,),
                      bcap: int = 8) -> FitResult:
    """Fit minimal (b, then a) with |f| <= p^(a + b ||lambda||) on every
    tested field and window; windows must grow so the fit can stabilize."""
    lam = tuple(lambda_vars)
    sig = domain.signature
    w_vars = [n for n, _ in sig.free if n not in lam]

    # Hypothesis probe: growth in w at fixed lambda falsifies boundedness.
    for fd in fields:
        probe_lams = [dict(zip(lam, pt)) for pt in
                      ([(0,) * len(lam)] if lam else [()])]
        for fix in probe_lams:
            if not w_vars:
                continue
            rep = check_bounded(fd, f, domain, box, depth, fixed=fix)
            if rep.verdict == "unbounded-suspected":
                return FitResult(False, record={
                    "hypothesis_violation": {
                        "field": str(fd), "lambda": fix,
                        "shell_maxima": rep.shell_maxima,
                        "reason": "per-shell maxima grow with the w-box edge"}})

    # Samples: max |f| per (field, lambda) over the w-cells.
    samples: dict[tuple[str, tuple[int, ...]], Fraction | float] = {}
    wmax = max(windows)
    for fd in fields:
        for pt in itertools.product(range(-wmax, wmax + 1), repeat=len(lam)):
            fix = dict(zip(lam, pt))
            enum = enumerate_set(fd, box, domain, fixed=fix)
            best = None
            for env in enum.true_dicts():
                env.update(fix)
                for twist in twists:
                    val = _abs_value(fd, box, f, env, twist)
                    if best is None or val > best:
                        best = val
            if best is not None:
                samples[(str(fd), pt)] = best

    if not samples:
        return FitResult(False, record={"error": "no sample points in the domain"})

    p_of = {str(fd): fd.p for fd in fields}
    tables: dict[int, list[int | None]] = {}
    # with no lambda coordinates the bound shape is q^a alone; b is 0
    b_range = [0] if not lam else list(range(-bcap, bcap + 1))
    for b in b_range:
        per_window = []
        for w in windows:
            need = None
            for (fdname, pt), val in samples.items():
                if max((abs(x) for x in pt), default=0) > w or val == 0:
                    continue
                norm = sum(abs(x) for x in pt)
                a_req = _min_exponent(p_of[fdname], val, b, norm)
                need = a_req if need is None else max(need, a_req)
            per_window.append(need)
        tables[b] = per_window
        if per_window[-1] is not None and per_window[-1] == per_window[-2]:
            a = per_window[-1]
            argmax = max(
                ((fdname, pt, val) for (fdname, pt), val in samples.items() if val != 0),
                key=lambda t: float(t[2]) / p_of[t[0]] ** (a + b * sum(abs(x) for x in t[1])),
                default=None)
            record = {
                "windows": list(windows),
                "a_by_window": {bb: tables[bb] for bb in tables},
                "tightest": None if argmax is None else {
                    "field": argmax[0], "lambda": list(argmax[1]),
                    "value": float(argmax[2])},
                "minimality": {
                    "b_minus_1": f"a does not stabilize: {tables.get(b - 1)}"
                                 if b - 1 in tables else "below search range",
                    "a_minus_1": "violated at the tightest sample"},
            }
            return FitResult(True, a, b, record)
    return FitResult(False, record={
        "error": f"no b in [-{bcap}, {bcap}] stabilized across windows",
        "a_by_window": {bb: t for bb, t in tables.items()}})


# ---------------------------------------------------------------------------
# statement files
# ---------------------------------------------------------------------------

@dataclass
class StatementFile:
    declared: dict[str, sx.Sort]
    functions: dict[str, MotivicFunction | MotivicExpFunction]
    statements: dict[str, StatementSpec]


_BOUND_KIND = re.compile(r"bound\s*\(\s*a\s*=\s*(-?\d+)\s*,\s*b\s*=\s*(-?\d+)\s*\)")


def parse_statement_file(text: str) -> StatementFile:
    """Statement files: var declarations, motivic/exp blocks, then
    ``statement name { kind: ...; function: ...; domain: ...; twists: [...]; }``."""
    sc = _Scanner(text)
    declared: dict[str, sx.Sort] = {}
    functions: dict[str, MotivicFunction | MotivicExpFunction] = {}
    statements: dict[str, StatementSpec] = {}
    while not sc.eof():
        kw = sc.word()
        if kw == "var":
            name = sc.word()
            sc.expect(":")
            declared[name] = sx.Sort(sc.word())
        elif kw in ("motivic", "exp"):
            name, fn = _parse_block(sc, kw, declared)
            functions[name] = fn
        elif kw == "statement":
            name = sc.word()
            sc.expect("{")
            fields: dict[str, str] = {}
            while sc.peek_char() != "}":
                key = sc.word()
                sc.expect(":")
                fields[key] = sc.until(";")
            sc.expect("}")
            statements[name] = _build_statement(name, fields, declared, functions)
        else:
            raise FormulaSyntaxError(f"unknown top-level keyword {kw!r}")
    return StatementFile(declared, functions, statements)


def _build_statement(name, fields, declared, functions) -> StatementSpec:
    kind_text = fields.get("kind", "").strip()
    bound_a = bound_b = 0
    m = _BOUND_KIND.fullmatch(kind_text)
    if m:
        kind = "bound"
        bound_a, bound_b = int(m.group(1)), int(m.group(2))
    else:
        kind = kind_text
    fn = None
    if "function" in fields:
        fname = fields["function"].strip()
        if fname not in functions:
            raise InputError(f"statement {name!r} references unknown function {fname!r}")
        fn = functions[fname]
    domain = None
    if "domain" in fields:
        domain = DefinableSet.make(fields["domain"], declared)
    formula = None
    if "formula" in fields:
        formula = DefinableSet.make(fields["formula"], declared)
    twists = (1,)
    if "twists" in fields:
        m2 = re.fullmatch(r"\[\s*(\d+(?:\s*,\s*\d+)*)?\s*\]", fields["twists"].strip())
        if not m2:
            raise FormulaSyntaxError(f"malformed twists list in statement {name!r}")
        if m2.group(1):
            twists = tuple(int(s) for s in m2.group(1).split(","))
    lam: tuple[str, ...] = ()
    if "lambda" in fields:
        m3 = re.fullmatch(r"\[\s*([A-Za-z_0-9,\s]*)\]", fields["lambda"].strip())
        if not m3:
            raise FormulaSyntaxError(f"malformed lambda list in statement {name!r}")
        lam = tuple(s.strip() for s in m3.group(1).split(",") if s.strip())
    return StatementSpec(name, kind, fn, domain, formula,
                         bound_a, bound_b, lam, twists)
