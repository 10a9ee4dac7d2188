"""Three-valued interpretation of formulas over a truncated model.

Quantifiers over the residue field are finite and evaluated exactly.
Quantifiers over the valued field and the value group are bounded by a
:class:`SearchBox`; a bounded search can certify an existential by
exhibiting a witness and refute a universal by a counterexample, but it
cannot certify the opposite verdicts, which therefore come out Unknown.
Truth is "truth at precision (box, depth)".

Atomic equality between valued-field terms is decided exactly when both
sides are exactly known (enumerated representatives and embedded constants
are exact); otherwise digits are compared on the common window and the atom
is Unknown when the windows are exhausted without a mismatch.  An ord()
applied to the exact zero makes the enclosing atom false; an ord() applied
to an element whose known digits have all cancelled makes it Unknown.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping

from . import syntax as sx
from .errors import BudgetError, OrdOfZeroError, PrecisionError, SortError
from .localfield import (FieldDesc, RFElem, VFElem, embed_constant, enumerate_ball,
                         vf_add, vf_equal_verdict, vf_mul, vf_neg, vf_ord, vf_ac)


class TruthVal(Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    def __invert__(self) -> "TruthVal":
        if self is TruthVal.TRUE:
            return TruthVal.FALSE
        if self is TruthVal.FALSE:
            return TruthVal.TRUE
        return TruthVal.UNKNOWN


def _from_bool(b: bool | None) -> TruthVal:
    if b is None:
        return TruthVal.UNKNOWN
    return TruthVal.TRUE if b else TruthVal.FALSE


@dataclass(frozen=True)
class SearchBox:
    """Finite windows for the unbounded sorts."""

    vmin: int = -2
    vmax: int = 6
    depth: int = 2
    zmin: int = -10
    zmax: int = 10

    def __post_init__(self):
        if self.vmin > self.vmax or self.zmin > self.zmax or self.depth < 1:
            raise ValueError(f"malformed search box {self}")

    def widened(self, extra_v: int = 0, extra_d: int = 0, extra_z: int = 0) -> "SearchBox":
        return SearchBox(self.vmin - extra_v, self.vmax + extra_v,
                         self.depth + extra_d, self.zmin - extra_z, self.zmax + extra_z)


@dataclass(frozen=True)
class DefinableSet:
    """A formula together with the sorts of its free variables."""

    formula: sx.Formula
    declared: tuple[tuple[str, sx.Sort], ...] = ()

    @classmethod
    def make(cls, formula: sx.Formula | str,
             declared: Mapping[str, sx.Sort] | None = None) -> "DefinableSet":
        if isinstance(formula, str):
            formula = sx.parse_formula(formula)
        ds = cls(formula, tuple(sorted((declared or {}).items())))
        ds.signature  # typecheck now, not at first use
        return ds

    @property
    def signature(self) -> sx.Signature:
        return sx.typecheck(self.formula, dict(self.declared))


Assignment = Mapping[str, "VFElem | RFElem | int"]


def value_sort(v) -> sx.Sort:
    if isinstance(v, VFElem):
        return sx.Sort.VF
    if isinstance(v, RFElem):
        return sx.Sort.RF
    if isinstance(v, int):
        return sx.Sort.ZZ
    raise SortError(f"not an element of any sort: {v!r}")


# ---------------------------------------------------------------------------
# term evaluation
# ---------------------------------------------------------------------------

def eval_term(fd: FieldDesc, env: Mapping, t: sx.Term, sort: sx.Sort):
    """Evaluate a term of known sort under an environment of typed values."""
    if isinstance(t, sx.Var):
        try:
            val = env[t.name]
        except KeyError:
            raise SortError(f"variable {t.name!r} has no assigned value")
        if value_sort(val) is not sort:
            raise SortError(f"variable {t.name!r} is {value_sort(val)}, expected {sort}")
        return val
    if isinstance(t, sx.IntLit):
        if sort is sx.Sort.ZZ:
            return t.value
        if sort is sx.Sort.RF:
            return RFElem(t.value, fd.p)
        return embed_constant(fd, t.value)
    if isinstance(t, sx.Unif):
        return fd.uniformizer()
    if isinstance(t, sx.Add):
        a = eval_term(fd, env, t.left, sort)
        b = eval_term(fd, env, t.right, sort)
        if sort is sx.Sort.ZZ:
            return a + b
        if sort is sx.Sort.RF:
            return a + b
        return vf_add(a, b)
    if isinstance(t, sx.Mul):
        a = eval_term(fd, env, t.left, sort)
        b = eval_term(fd, env, t.right, sort)
        if sort is sx.Sort.ZZ:
            return a * b  # literal * term: iterated addition, folded
        if sort is sx.Sort.RF:
            return a * b
        return vf_mul(a, b)
    if isinstance(t, sx.Neg):
        a = eval_term(fd, env, t.arg, sort)
        if sort is sx.Sort.VF:
            return vf_neg(a)
        return -a
    if isinstance(t, sx.Ord):
        x = eval_term(fd, env, t.arg, sx.Sort.VF)
        return vf_ord(x)  # OrdOfZeroError / PrecisionError propagate
    if isinstance(t, sx.Ac):
        x = eval_term(fd, env, t.arg, sx.Sort.VF)
        return vf_ac(x)
    raise TypeError(f"not a term: {t!r}")


def _sorts_env(env: Mapping) -> dict[str, sx.Sort]:
    return {name: value_sort(v) for name, v in env.items()}


def _atom_sort(f, env_sorts: dict[str, sx.Sort]) -> sx.Sort:
    if isinstance(f, (sx.Le, sx.Cong)):
        return sx.Sort.ZZ
    s = sx.term_sort(f.left, env_sorts) or sx.term_sort(f.right, env_sorts)
    return s or sx.Sort.ZZ  # literals-only comparison


# ---------------------------------------------------------------------------
# formula evaluation
# ---------------------------------------------------------------------------

def eval_formula(fd: FieldDesc, box: SearchBox, assign: Assignment,
                 f: sx.Formula | DefinableSet,
                 diagnostics: list[str] | None = None) -> TruthVal:
    """Verdict of a formula at an assignment, at the box's precision."""
    if isinstance(f, DefinableSet):
        sig = f.signature
        for name, sort in sig.free:
            if name not in assign:
                raise SortError(f"free variable {name!r} is unassigned")
            if value_sort(assign[name]) is not sort:
                raise SortError(f"assignment for {name!r} has the wrong sort")
        f = f.formula
    else:
        sx.typecheck(f, _sorts_env(assign))
    return _eval(fd, box, dict(assign), f, diagnostics)


def _eval(fd: FieldDesc, box: SearchBox, env: dict, f: sx.Formula,
          diagnostics: list[str] | None) -> TruthVal:
    if isinstance(f, sx.And):
        a = _eval(fd, box, env, f.left, diagnostics)
        if a is TruthVal.FALSE:
            return TruthVal.FALSE
        b = _eval(fd, box, env, f.right, diagnostics)
        if b is TruthVal.FALSE:
            return TruthVal.FALSE
        if TruthVal.UNKNOWN in (a, b):
            return TruthVal.UNKNOWN
        return TruthVal.TRUE
    if isinstance(f, sx.Or):
        a = _eval(fd, box, env, f.left, diagnostics)
        if a is TruthVal.TRUE:
            return TruthVal.TRUE
        b = _eval(fd, box, env, f.right, diagnostics)
        if b is TruthVal.TRUE:
            return TruthVal.TRUE
        if TruthVal.UNKNOWN in (a, b):
            return TruthVal.UNKNOWN
        return TruthVal.FALSE
    if isinstance(f, sx.Not):
        return ~_eval(fd, box, env, f.arg, diagnostics)
    if isinstance(f, sx.Quant):
        return _eval_quant(fd, box, env, f, diagnostics)
    return _eval_atom(fd, env, f, diagnostics)


def _eval_atom(fd: FieldDesc, env: dict, f: sx.Formula,
               diagnostics: list[str] | None) -> TruthVal:
    sort = _atom_sort(f, _sorts_env(env))
    try:
        if isinstance(f, sx.Eq):
            a = eval_term(fd, env, f.left, sort)
            b = eval_term(fd, env, f.right, sort)
            if sort is sx.Sort.VF:
                return _from_bool(vf_equal_verdict(a, b))
            if sort is sx.Sort.RF:
                return _from_bool(a.value == b.value)
            return _from_bool(a == b)
        if isinstance(f, sx.Le):
            return _from_bool(eval_term(fd, env, f.left, sort)
                              <= eval_term(fd, env, f.right, sort))
        if isinstance(f, sx.Cong):
            a = eval_term(fd, env, f.left, sort)
            b = eval_term(fd, env, f.right, sort)
            return _from_bool((a - b) % f.modulus == 0)
    except OrdOfZeroError:
        # ord is only defined on nonzero elements; an atom that needs
        # ord(0) does not hold
        return TruthVal.FALSE
    except PrecisionError as e:
        if diagnostics is not None:
            diagnostics.append(f"precision exhausted in {sx.format_formula(f)}: {e}")
        return TruthVal.UNKNOWN
    raise TypeError(f"not an atom: {f!r}")


_MISSING = object()


def _quant_domain(fd: FieldDesc, box: SearchBox, sort: sx.Sort) -> Iterator:
    if sort is sx.Sort.RF:
        return (RFElem(j, fd.p) for j in range(fd.p))
    if sort is sx.Sort.ZZ:
        return iter(range(box.zmin, box.zmax + 1))
    return enumerate_ball(fd, box.vmin, box.vmax, min(box.depth, fd.N))


def _eval_quant(fd: FieldDesc, box: SearchBox, env: dict, f: sx.Quant,
                diagnostics: list[str] | None) -> TruthVal:
    if not sx.var_occurs(f.body, f.var):
        return _eval(fd, box, env, f.body, diagnostics)
    exact = f.sort is sx.Sort.RF
    saw_unknown = False
    shadowed = env.get(f.var, _MISSING)
    verdict = None
    for val in _quant_domain(fd, box, f.sort):
        env[f.var] = val
        v = _eval(fd, box, env, f.body, diagnostics)
        if f.kind == "exists" and v is TruthVal.TRUE:
            verdict = TruthVal.TRUE
            break
        if f.kind == "forall" and v is TruthVal.FALSE:
            verdict = TruthVal.FALSE
            break
        if v is TruthVal.UNKNOWN:
            saw_unknown = True
    if shadowed is _MISSING:
        env.pop(f.var, None)
    else:
        env[f.var] = shadowed
    if verdict is not None:
        return verdict
    if exact and not saw_unknown:
        return TruthVal.FALSE if f.kind == "exists" else TruthVal.TRUE
    # a finite window certifies neither absence of witnesses nor
    # absence of counterexamples
    return TruthVal.UNKNOWN


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

@dataclass
class Enumeration:
    varnames: tuple[str, ...]
    true: list[tuple] = field(default_factory=list)
    unknown: list[tuple] = field(default_factory=list)

    def true_dicts(self) -> list[dict]:
        return [dict(zip(self.varnames, tup)) for tup in self.true]


def enumerate_set(fd: FieldDesc, box: SearchBox, dset: DefinableSet,
                  fixed: Assignment | None = None,
                  budget: int | None = 200_000) -> Enumeration:
    """All tuples in the box whose verdict is True, plus the Unknown ones.

    ``fixed`` pins a subset of the free variables; the rest range over the
    box (VF), all of the residue field (RF), or the z-window (ZZ), in
    signature order with valuations ascending and digits lexicographic.
    """
    fixed = dict(fixed or {})
    sig = dset.signature
    open_vars = [(n, s) for n, s in sig.free if n not in fixed]
    out = Enumeration(tuple(n for n, _ in open_vars))
    domains = [list(_quant_domain(fd, box, s)) for _, s in open_vars]
    count = 0
    for tup in itertools.product(*domains):
        count += 1
        if budget is not None and count > budget:
            raise BudgetError(f"enumeration exceeded budget of {budget} tuples")
        env = dict(fixed)
        env.update({n: v for (n, _), v in zip(open_vars, tup)})
        v = eval_formula(fd, box, env, dset)
        if v is TruthVal.TRUE:
            out.true.append(tup)
        elif v is TruthVal.UNKNOWN:
            out.unknown.append(tup)
    return out


def count_rf_fiber(fd: FieldDesc, box: SearchBox, dset: DefinableSet,
                   base: Assignment) -> int:
    """Exact cardinality of the residue-field fiber over a base point."""
    sig = dset.signature
    fiber_vars = [(n, s) for n, s in sig.free if n not in base]
    for n, s in fiber_vars:
        if s is not sx.Sort.RF:
            raise SortError(f"fiber variable {n!r} has sort {s}; fibers must be RF-only")
    total = 0
    for tup in itertools.product(range(fd.p), repeat=len(fiber_vars)):
        env = dict(base)
        env.update({n: RFElem(v, fd.p) for (n, _), v in zip(fiber_vars, tup)})
        verdict = eval_formula(fd, box, env, dset)
        if verdict is TruthVal.UNKNOWN:
            raise PrecisionError("fiber membership Unknown; count would be a guess")
        if verdict is TruthVal.TRUE:
            total += 1
    return total


def find_witnesses(fd: FieldDesc, box: SearchBox, assign: Assignment,
                   f: sx.Formula, limit: int = 5) -> list:
    """Witnesses for a top-level existential, for reporting purposes."""
    if not isinstance(f, sx.Quant) or f.kind != "exists":
        return []
    out = []
    for val in _quant_domain(fd, box, f.sort):
        env = dict(assign)
        env[f.var] = val
        if _eval(fd, box, env, f.body, None) is TruthVal.TRUE:
            out.append(val)
            if len(out) >= limit:
                break
    return out


# ---------------------------------------------------------------------------
# static analysis used by the integrator's fast path
# ---------------------------------------------------------------------------

def depends_only_on_ord(f: sx.Formula | sx.Term, name: str) -> bool:
    """True when every occurrence of the variable is wrapped in ord(),
    or appears in an equality against the literal zero (which the sign of
    the leading digit decides uniformly for nonzero cell representatives).
    """
    def walk(node) -> bool:
        if isinstance(node, sx.Var):
            return node.name != name
        if isinstance(node, (sx.IntLit, sx.Unif)):
            return True
        if isinstance(node, sx.Ord):
            if isinstance(node.arg, sx.Var):
                return True
            return walk(node.arg)
        if isinstance(node, sx.Eq):
            l, r = node.left, node.right
            if isinstance(l, sx.Var) and l.name == name and r == sx.IntLit(0):
                return True
            if isinstance(r, sx.Var) and r.name == name and l == sx.IntLit(0):
                return True
            return walk(l) and walk(r)
        if isinstance(node, sx.Quant):
            if node.var == name:
                return True
            return walk(node.body)
        for attr in ("left", "right", "arg"):
            child = getattr(node, attr, None)
            if child is not None and not walk(child):
                return False
        return True

    return walk(f)
