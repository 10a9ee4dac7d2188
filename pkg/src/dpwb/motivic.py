"""Motivic functions, motivic exponential functions, and additive characters.

A motivic function is a finite sum of terms

    q^alpha(x) * #fiber(x) * prod_j beta_j(x) * prod_l 1/(1 - q^(a_l))

with alpha and the betas integer-valued definable functions, the fiber a
definable subset of residue-field tuples over the base point, and the a_l
nonzero integers.  Evaluation is exact rational arithmetic.

The exponential variant replaces the fiber count by a character sum
sum_y L(g(x,y)) * Lbar(e(x,y)) over the fiber, where L is an additive
character trivial on the maximal ideal and nontrivial on the valuation
ring, and Lbar the induced character of the residue field.  One canonical
L is fixed per field; other members of the admissible family are sampled
by twisting, L_c(z) = L(c z) for a unit c.  Character sums are exact
root-of-unity combinations (:class:`~dpwb.rootsum.RootSum`).

File format::

    var x : VF
    motivic name {
      term { alpha: <zexpr>; beta: <zexpr>; fiber(r=K): <formula>; geom: [a1,...]; }
      domain: <formula>;
    }
    exp name {
      term { alpha: ...; fiber(r=K): <formula>; g: <vfexpr>; e: <rfexpr>; }
    }

``beta:`` may repeat; every component of a term is optional.  Fiber
variables are named y1..yK and have sort RF.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from . import syntax as sx
from .errors import (CharacterPrecisionError, DomainError, FormulaSyntaxError,
                     GraphWitnessError, InputError, OrdOfZeroError, PrecisionError,
                     UnresolvedError)
from .localfield import FieldDesc, RFElem, VFElem, embed_constant, vf_mul
from .rootsum import RootSum
from .semantics import (Assignment, DefinableSet, SearchBox, TruthVal, eval_formula,
                        eval_term)


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------

def canonical_character(fd: FieldDesc, x: VFElem, twist: int = 1) -> RootSum:
    """The fixed additive character of the field, optionally twisted by a unit.

    In Q_p the value is e^(2 pi i frac(x/p)) with frac the p-adic fractional
    part; in F_p((t)) it is e^(2 pi i s/p) with s the sum of the expansion
    coefficients at indices <= 0.  Both are trivial on the maximal ideal and
    take the value e^(2 pi i/p) at 1.
    """
    if twist != 1:
        if twist % fd.p == 0:
            raise InputError(f"twist {twist} is not a unit mod {fd.p}")
        x = vf_mul(embed_constant(fd, twist), x)
    if x.exact_zero or x.v >= 1:
        return RootSum.one(fd.p)
    if not x.exact and (x.end is None or x.end < 1):
        raise CharacterPrecisionError(
            f"character needs digits through index 0; window ends at {x.end}")
    k = 1 - x.v
    if fd.family == "Qp":
        m = 0
        for i in range(x.v, 1):
            m += x.digit_at(i) * fd.p ** (i - x.v)
        return RootSum.root(fd.p, k, m)
    s = sum(x.digit_at(i) for i in range(x.v, 1)) % fd.p
    return RootSum.root(fd.p, 1, s)


def residue_character(fd: FieldDesc, u: RFElem | int, twist: int = 1) -> RootSum:
    """Induced character of the residue field: compatible with lifting."""
    val = u.value if isinstance(u, RFElem) else u % fd.p
    return RootSum.root(fd.p, 1, (twist * val) % fd.p)


# ---------------------------------------------------------------------------
# integer-valued definable functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZFunction:
    """Z-valued function of the base point: an explicit ZZ term, or the graph
    of a definable relation searched over a declared window."""

    term: sx.Term | None = None
    graph: DefinableSet | None = None
    graph_var: str = "zval"
    window: tuple[int, int] = (-64, 64)

    def __post_init__(self):
        if (self.term is None) == (self.graph is None):
            raise InputError("ZFunction needs exactly one of term/graph")

    @staticmethod
    def const(n: int) -> "ZFunction":
        return ZFunction(term=sx.IntLit(n))

    @staticmethod
    def from_text(text: str) -> "ZFunction":
        return ZFunction(term=sx.parse_term(text))

    def evaluate(self, fd: FieldDesc, box: SearchBox, assign: Assignment) -> int:
        if self.term is not None:
            try:
                return eval_term(fd, dict(assign), self.term, sx.Sort.ZZ)
            except (OrdOfZeroError, PrecisionError) as e:
                raise UnresolvedError(f"Z-function unresolved: {e}") from e
        lo, hi = self.window
        hits = []
        unknowns = 0
        for z in range(lo, hi + 1):
            env = dict(assign)
            env[self.graph_var] = z
            v = eval_formula(fd, box, env, self.graph)
            if v is TruthVal.TRUE:
                hits.append(z)
            elif v is TruthVal.UNKNOWN:
                unknowns += 1
        if len(hits) != 1:
            raise GraphWitnessError(
                f"graph Z-function found {len(hits)} witnesses in {self.window} "
                f"({unknowns} Unknown); refusing to guess")
        return hits[0]


# ---------------------------------------------------------------------------
# motivic functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MotivicTerm:
    alpha: ZFunction
    betas: tuple[ZFunction, ...] = ()
    fiber: DefinableSet | None = None
    geom: tuple[int, ...] = ()

    def __post_init__(self):
        if any(a == 0 for a in self.geom):
            raise InputError("geometric factors 1/(1-q^a) require nonzero a")


@dataclass(frozen=True)
class MotivicFunction:
    terms: tuple[MotivicTerm, ...]
    domain: DefinableSet | None = None
    name: str = ""


def _check_domain(fd: FieldDesc, box: SearchBox, domain: DefinableSet | None,
                  assign: Assignment) -> None:
    if domain is None:
        return
    v = eval_formula(fd, box, assign, domain)
    if v is TruthVal.FALSE:
        raise DomainError("point lies outside the function's domain")
    if v is TruthVal.UNKNOWN:
        raise UnresolvedError("domain membership Unknown at this precision")


def _fiber_count(fd: FieldDesc, box: SearchBox, fiber: DefinableSet | None,
                 assign: Assignment) -> int:
    if fiber is None:
        return 1
    from .semantics import count_rf_fiber
    base = {n: assign[n] for n, _ in fiber.signature.free if n in assign}
    return count_rf_fiber(fd, box, fiber, base)


def eval_motivic(fd: FieldDesc, box: SearchBox, f: MotivicFunction,
                 assign: Assignment) -> Fraction:
    """Exact value at a point; q-powers, counts, betas and geometric factors."""
    _check_domain(fd, box, f.domain, assign)
    p = Fraction(fd.q)
    total = Fraction(0)
    for term in f.terms:
        a = term.alpha.evaluate(fd, box, assign)
        val = p**a
        val *= _fiber_count(fd, box, term.fiber, assign)
        for beta in term.betas:
            val *= beta.evaluate(fd, box, assign)
        for g in term.geom:
            val *= 1 / (1 - p**g)
        total += val
    return total


# ---------------------------------------------------------------------------
# motivic exponential functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpTerm:
    factor: MotivicFunction | None = None  # None means the constant 1
    fiber: DefinableSet | None = None      # None means a single point
    g: sx.Term | None = None               # VF argument of the big character
    e: sx.Term | None = None               # RF argument of the residue character
    g_shift: int = 0                       # character reads w^g_shift * g instead


@dataclass(frozen=True)
class MotivicExpFunction:
    terms: tuple[ExpTerm, ...]
    domain: DefinableSet | None = None
    name: str = ""


def _unif_power(fd: FieldDesc, k: int) -> VFElem:
    if fd.family == "Qp":
        from fractions import Fraction as _F
        from .localfield import qp_from_fraction
        return qp_from_fraction(fd, _F(fd.p) ** k)
    from .localfield import fpt_from_coeffs
    return fpt_from_coeffs(fd, k, [1])


def _fiber_tuples(fd: FieldDesc, box: SearchBox, fiber: DefinableSet | None,
                  assign: Assignment):
    """Yield environments ranging over the residue-field fiber (verdict True)."""
    import itertools
    if fiber is None:
        yield dict(assign)
        return
    sig = fiber.signature
    fiber_vars = [(n, s) for n, s in sig.free if n not in assign]
    for n, s in fiber_vars:
        if s is not sx.Sort.RF:
            raise InputError(f"character fiber variable {n!r} must be RF, got {s}")
    for tup in itertools.product(range(fd.p), repeat=len(fiber_vars)):
        env = dict(assign)
        env.update({n: RFElem(v, fd.p) for (n, _), v in zip(fiber_vars, tup)})
        v = eval_formula(fd, box, env, fiber)
        if v is TruthVal.UNKNOWN:
            raise UnresolvedError("fiber membership Unknown at this precision")
        if v is TruthVal.TRUE:
            yield env


def eval_exp(fd: FieldDesc, box: SearchBox, f: MotivicExpFunction,
             assign: Assignment, twist: int = 1) -> RootSum:
    """Exact root-of-unity value of a motivic exponential function."""
    _check_domain(fd, box, f.domain, assign)
    total = RootSum.zero(fd.p)
    for term in f.terms:
        factor = Fraction(1) if term.factor is None else \
            eval_motivic(fd, box, term.factor, assign)
        charsum = RootSum.zero(fd.p)
        for env in _fiber_tuples(fd, box, term.fiber, assign):
            val = RootSum.one(fd.p)
            if term.g is not None:
                gval = eval_term(fd, env, term.g, sx.Sort.VF)
                if term.g_shift:
                    gval = vf_mul(gval, _unif_power(fd, term.g_shift))
                val = val * canonical_character(fd, gval, twist)
            if term.e is not None:
                eval_ = eval_term(fd, env, term.e, sx.Sort.RF)
                val = val * residue_character(fd, eval_, twist)
            charsum = charsum + val
        total = total + charsum * factor
    return total


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

@dataclass
class MotivicFile:
    declared: dict[str, sx.Sort]
    motivic: dict[str, MotivicFunction]
    exp: dict[str, MotivicExpFunction]

    def function(self, name: str) -> MotivicFunction | MotivicExpFunction:
        if name in self.motivic:
            return self.motivic[name]
        if name in self.exp:
            return self.exp[name]
        raise InputError(f"no function named {name!r} in file")


class _Scanner:
    def __init__(self, text: str):
        # strip comments but keep newlines for positions
        self.text = re.sub(r"#[^\n]*", "", text)
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def eof(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def word(self) -> str:
        self.skip_ws()
        m = re.match(r"[A-Za-z_][A-Za-z_0-9]*", self.text[self.pos:])
        if not m:
            raise FormulaSyntaxError(f"expected a word at ...{self.text[self.pos:self.pos+25]!r}")
        self.pos += m.end()
        return m.group()

    def expect(self, lit: str):
        self.skip_ws()
        if not self.text.startswith(lit, self.pos):
            raise FormulaSyntaxError(
                f"expected {lit!r} at ...{self.text[self.pos:self.pos+25]!r}")
        self.pos += len(lit)

    def peek_char(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def until(self, stop: str) -> str:
        end = self.text.find(stop, self.pos)
        if end < 0:
            raise FormulaSyntaxError(f"missing {stop!r}")
        out = self.text[self.pos:end]
        self.pos = end + len(stop)
        return out.strip()


_FIBER_KEY = re.compile(r"fiber\s*\(\s*r\s*=\s*(\d+)\s*\)")


def _parse_term_block(sc: _Scanner, declared: dict[str, sx.Sort], is_exp: bool):
    sc.expect("{")
    alpha = ZFunction.const(0)
    betas: list[ZFunction] = []
    fiber = None
    geom: list[int] = []
    g = e = None
    g_shift = 0
    saw = set()
    while sc.peek_char() != "}":
        sc.skip_ws()
        m = _FIBER_KEY.match(sc.text, sc.pos)
        if m:
            sc.pos = m.end()
            sc.expect(":")
            r = int(m.group(1))
            body = sc.until(";")
            decls = dict(declared)
            decls.update({f"y{i}": sx.Sort.RF for i in range(1, r + 1)})
            fiber = DefinableSet.make(body, decls)
            saw.add("fiber")
            continue
        key = sc.word()
        sc.expect(":")
        body = sc.until(";")
        if key == "alpha":
            alpha = ZFunction.from_text(body)
        elif key == "beta":
            betas.append(ZFunction.from_text(body))
        elif key == "geom":
            m2 = re.fullmatch(r"\[\s*(-?\d+(?:\s*,\s*-?\d+)*)?\s*\]", body)
            if not m2:
                raise FormulaSyntaxError(f"malformed geom list {body!r}")
            if m2.group(1):
                geom = [int(s) for s in m2.group(1).split(",")]
        elif key == "g" and is_exp:
            g = sx.parse_term(body)
        elif key == "gshift" and is_exp:
            g_shift = int(body)
        elif key == "e" and is_exp:
            e = sx.parse_term(body)
        else:
            raise FormulaSyntaxError(f"unknown term entry {key!r}")
        saw.add(key)
    sc.expect("}")
    if is_exp:
        factor = None
        if saw & {"alpha", "beta", "geom"}:
            factor = MotivicFunction(
                (MotivicTerm(alpha, tuple(betas), None, tuple(geom)),))
        return ExpTerm(factor, fiber, g, e, g_shift)
    return MotivicTerm(alpha, tuple(betas), fiber, tuple(geom))


def _parse_block(sc: _Scanner, kind: str, declared: dict[str, sx.Sort]):
    name = sc.word()
    sc.expect("{")
    terms = []
    domain = None
    while sc.peek_char() != "}":
        key = sc.word()
        if key == "term":
            terms.append(_parse_term_block(sc, declared, kind == "exp"))
        elif key == "domain":
            sc.expect(":")
            domain = DefinableSet.make(sc.until(";"), declared)
        else:
            raise FormulaSyntaxError(f"unknown block entry {key!r}")
    sc.expect("}")
    if kind == "exp":
        return name, MotivicExpFunction(tuple(terms), domain, name)
    return name, MotivicFunction(tuple(terms), domain, name)


def parse_motivic_file(text: str) -> MotivicFile:
    sc = _Scanner(text)
    declared: dict[str, sx.Sort] = {}
    motivic: dict[str, MotivicFunction] = {}
    exp: dict[str, MotivicExpFunction] = {}
    while not sc.eof():
        kw = sc.word()
        if kw == "var":
            name = sc.word()
            sc.expect(":")
            sort = sc.word()
            try:
                declared[name] = sx.Sort(sort)
            except ValueError:
                raise FormulaSyntaxError(f"unknown sort {sort!r}")
        elif kw == "motivic":
            name, fn = _parse_block(sc, "motivic", declared)
            motivic[name] = fn
        elif kw == "exp":
            name, fn = _parse_block(sc, "exp", declared)
            exp[name] = fn
        else:
            raise FormulaSyntaxError(f"unknown top-level keyword {kw!r}")
    return MotivicFile(declared, motivic, exp)
