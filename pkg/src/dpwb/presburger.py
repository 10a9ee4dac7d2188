"""Quantifier elimination and normal forms for the value-group fragment.

The fragment is linear integer arithmetic with <=, congruences mod d, and
no multiplication of variables.  Quantifiers are eliminated Cooper-style:
coefficients of the bound variable are unified via an lcm substitution with
a divisibility side constraint, then the classic minus-infinity/boundary
disjunction replaces the quantifier.  Any complete procedure would do; this
one is fixed so normal forms are deterministic and diffable.

A :class:`PresburgerSet` is a quantifier-free disjunctive normal form:
every disjunct is a conjunction of inequalities ``row . x + c >= 0`` and
congruences ``row . x + c === 0 mod d``.  For one free variable the set is
further normalizable into finitely many arithmetic progressions (upward or
downward infinite) and isolated points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import syntax as sx
from .errors import ResourceError, SortError

MAX_MODULUS = 10**6
MAX_DISJUNCTS = 200_000


# ---------------------------------------------------------------------------
# rows: linear forms over an ordered variable list
# ---------------------------------------------------------------------------

Row = tuple[int, ...]  # coefficients; constants kept separately


def _row_add(a: Row, b: Row) -> Row:
    return tuple(x + y for x, y in zip(a, b))


def _row_scale(a: Row, k: int) -> Row:
    return tuple(k * x for x in a)


@dataclass(frozen=True, order=True)
class Ineq:
    """row . x + const >= 0"""
    row: Row
    const: int


@dataclass(frozen=True, order=True)
class CongAtom:
    """row . x + const === 0 (mod modulus)"""
    row: Row
    const: int
    modulus: int


Atom = Ineq | CongAtom


@dataclass(frozen=True)
class Conjunct:
    ineqs: tuple[Ineq, ...]
    congs: tuple[CongAtom, ...]


@dataclass(frozen=True)
class PresburgerSet:
    """Quantifier-free DNF over Z^r; membership is decidable by evaluation."""

    varnames: tuple[str, ...]
    disjuncts: tuple[Conjunct, ...]

    @property
    def r(self) -> int:
        return len(self.varnames)

    def contains(self, point: tuple[int, ...]) -> bool:
        assert len(point) == self.r
        for dj in self.disjuncts:
            ok = all(sum(c * x for c, x in zip(a.row, point)) + a.const >= 0
                     for a in dj.ineqs)
            if ok and all((sum(c * x for c, x in zip(a.row, point)) + a.const)
                          % a.modulus == 0 for a in dj.congs):
                return True
        return False


@dataclass(frozen=True)
class Progression1D:
    """An arithmetic progression running up or down, or an isolated point."""

    base: int
    step: int  # >= 1 for progressions, 0 for points
    direction: str  # "+" | "-" | "point"

    def contains(self, x: int) -> bool:
        if self.direction == "point":
            return x == self.base
        if self.direction == "+":
            return x >= self.base and (x - self.base) % self.step == 0
        return x <= self.base and (self.base - x) % self.step == 0


# ---------------------------------------------------------------------------
# formula -> internal tree
# ---------------------------------------------------------------------------

def _literal_value(t: sx.Term) -> int | None:
    if isinstance(t, sx.IntLit):
        return t.value
    if isinstance(t, sx.Neg):
        v = _literal_value(t.arg)
        return None if v is None else -v
    if isinstance(t, sx.Add):
        a, b = _literal_value(t.left), _literal_value(t.right)
        return None if a is None or b is None else a + b
    if isinstance(t, sx.Mul):
        a, b = _literal_value(t.left), _literal_value(t.right)
        return None if a is None or b is None else a * b
    return None


def _linearize(t: sx.Term, cols: dict[str, int], ncols: int) -> tuple[Row, int]:
    if isinstance(t, sx.IntLit):
        return (0,) * ncols, t.value
    if isinstance(t, sx.Var):
        if t.name not in cols:
            raise SortError(f"variable {t.name!r} is not a ZZ variable in scope")
        row = [0] * ncols
        row[cols[t.name]] = 1
        return tuple(row), 0
    if isinstance(t, sx.Add):
        ra, ca = _linearize(t.left, cols, ncols)
        rb, cb = _linearize(t.right, cols, ncols)
        return _row_add(ra, rb), ca + cb
    if isinstance(t, sx.Neg):
        ra, ca = _linearize(t.arg, cols, ncols)
        return _row_scale(ra, -1), -ca
    if isinstance(t, sx.Mul):
        k = _literal_value(t.left)
        other = t.right
        if k is None:
            k = _literal_value(t.right)
            other = t.left
        if k is None:
            raise SortError(f"nonlinear ZZ term {sx.format_term(t)}")
        ra, ca = _linearize(other, cols, ncols)
        return _row_scale(ra, k), k * ca
    raise SortError(f"term {sx.format_term(t)} is not in the ZZ fragment")


def validate_zz_fragment(f: sx.Formula, declared: dict[str, sx.Sort] | None = None) -> sx.Signature:
    # every variable of the fragment lives in the value group, so free
    # variables default to ZZ; a conflicting use still raises
    decls = {name: sx.Sort.ZZ for name in sx.free_vars(f)}
    decls.update(declared or {})
    sig = sx.typecheck(f, decls)
    for name, sort in sig.free:
        if sort is not sx.Sort.ZZ:
            raise SortError(f"free variable {name!r} has sort {sort}, expected ZZ")

    def walk(node):
        if isinstance(node, (sx.Ord, sx.Ac, sx.Unif)):
            raise SortError("valued-field symbols are not allowed in the ZZ fragment")
        for attr in ("left", "right", "arg", "body"):
            child = getattr(node, attr, None)
            if child is not None and not isinstance(child, (int, str, sx.Sort)):
                walk(child)
        if isinstance(node, sx.Quant) and node.sort is not sx.Sort.ZZ:
            raise SortError("only ZZ quantifiers are allowed in the ZZ fragment")

    walk(f)
    return sig


# internal tree nodes: ("atom", Atom) | ("and"|"or", l, r) | ("not", x)
# | ("exists", col, body) | ("true",) | ("false",)

def _build_tree(f: sx.Formula, cols: dict[str, int], counter: list[int], ncols: int):
    if isinstance(f, sx.Le):
        ra, ca = _linearize(f.left, cols, ncols)
        rb, cb = _linearize(f.right, cols, ncols)
        return ("atom", Ineq(_row_add(rb, _row_scale(ra, -1)), cb - ca))
    if isinstance(f, sx.Eq):
        ra, ca = _linearize(f.left, cols, ncols)
        rb, cb = _linearize(f.right, cols, ncols)
        le = ("atom", Ineq(_row_add(rb, _row_scale(ra, -1)), cb - ca))
        ge = ("atom", Ineq(_row_add(ra, _row_scale(rb, -1)), ca - cb))
        return ("and", le, ge)
    if isinstance(f, sx.Cong):
        ra, ca = _linearize(f.left, cols, ncols)
        rb, cb = _linearize(f.right, cols, ncols)
        return ("atom", CongAtom(_row_add(ra, _row_scale(rb, -1)), ca - cb, f.modulus))
    if isinstance(f, sx.And):
        return ("and", _build_tree(f.left, cols, counter, ncols),
                _build_tree(f.right, cols, counter, ncols))
    if isinstance(f, sx.Or):
        return ("or", _build_tree(f.left, cols, counter, ncols),
                _build_tree(f.right, cols, counter, ncols))
    if isinstance(f, sx.Not):
        return ("not", _build_tree(f.arg, cols, counter, ncols))
    if isinstance(f, sx.Quant):
        col = counter[0]
        counter[0] += 1
        if col >= ncols:
            raise ResourceError("quantifier nesting exceeded preallocated columns")
        body = _build_tree(f.body, {**cols, f.var: col}, counter, ncols)
        if f.kind == "exists":
            return ("exists", col, body)
        return ("not", ("exists", col, ("not", body)))
    raise SortError(f"formula {sx.format_formula(f)} is not in the ZZ fragment")


def _negate_atom(a: Atom):
    if isinstance(a, Ineq):
        # not(row + c >= 0)  <=>  -row - c - 1 >= 0
        return [("atom", Ineq(_row_scale(a.row, -1), -a.const - 1))]
    # not(row + c === 0 mod d)  <=>  OR_j row + c + j === 0 mod d
    return [("atom", CongAtom(a.row, a.const + j, a.modulus))
            for j in range(1, a.modulus)]


def _nnf(tree, positive: bool):
    kind = tree[0]
    if kind == "atom":
        if positive:
            return tree
        alts = _negate_atom(tree[1])
        out = alts[0]
        for alt in alts[1:]:
            out = ("or", out, alt)
        return out
    if kind in ("true", "false"):
        if positive:
            return tree
        return ("false",) if kind == "true" else ("true",)
    if kind == "not":
        return _nnf(tree[1], not positive)
    if kind in ("and", "or"):
        k = kind if positive else ("or" if kind == "and" else "and")
        return (k, _nnf(tree[1], positive), _nnf(tree[2], positive))
    if kind == "exists":
        body = _nnf(tree[2], True)
        if positive:
            return ("exists", tree[1], body)
        # the negation applies to the quantifier, not its body; the
        # eliminator complements the inner DNF when it meets this node
        return ("not", ("exists", tree[1], body))
    raise AssertionError(kind)


# ---------------------------------------------------------------------------
# DNF machinery
# ---------------------------------------------------------------------------

def _simplify_conjunct(ineqs: list[Ineq], congs: list[CongAtom]) -> Conjunct | None:
    """Canonicalize one conjunct; None when it is unsatisfiable on its face."""
    clean_i: set[Ineq] = set()
    for a in ineqs:
        if all(c == 0 for c in a.row):
            if a.const < 0:
                return None
            continue
        g = math.gcd(*[abs(c) for c in a.row])
        clean_i.add(Ineq(tuple(c // g for c in a.row), a.const // g))  # floor div
    clean_c: set[CongAtom] = set()
    for a in congs:
        d = a.modulus
        if d > MAX_MODULUS:
            raise ResourceError(f"congruence modulus {d} exceeds cap {MAX_MODULUS}")
        if all(c == 0 for c in a.row):
            if a.const % d != 0:
                return None
            continue
        g = math.gcd(d, *[abs(c) for c in a.row])
        if g > 1:
            if a.const % g != 0:
                return None
            a = CongAtom(tuple(c // g for c in a.row), a.const // g, d // g)
        if a.modulus == 1:
            continue
        clean_c.add(CongAtom(a.row, a.const % a.modulus, a.modulus))
    return Conjunct(tuple(sorted(clean_i, key=lambda a: (a.row, a.const))),
                    tuple(sorted(clean_c, key=lambda a: (a.row, a.const, a.modulus))))


def _dnf_and(a: list[Conjunct], b: list[Conjunct]) -> list[Conjunct]:
    out = []
    for x in a:
        for y in b:
            c = _simplify_conjunct(list(x.ineqs) + list(y.ineqs),
                                   list(x.congs) + list(y.congs))
            if c is not None:
                out.append(c)
            if len(out) > MAX_DISJUNCTS:
                raise ResourceError("DNF blowup exceeded disjunct cap")
    return out


def _subst_col(atom: Atom, col: int, row: Row, const: int) -> Atom:
    """Substitute x_col := row . x + const into an atom (row has 0 at col)."""
    k = atom.row[col]
    new_row = list(_row_add(atom.row, _row_scale(row, k)))
    new_row[col] = 0
    if isinstance(atom, Ineq):
        return Ineq(tuple(new_row), atom.const + k * const)
    return CongAtom(tuple(new_row), atom.const + k * const, atom.modulus)


def _cooper_eliminate(dj: Conjunct, col: int) -> list[Conjunct]:
    """Eliminate an existential variable from one conjunct."""
    mentions = [a for a in dj.ineqs if a.row[col] != 0] + \
               [a for a in dj.congs if a.row[col] != 0]
    keep_i = [a for a in dj.ineqs if a.row[col] == 0]
    keep_c = [a for a in dj.congs if a.row[col] == 0]
    if not mentions:
        return [dj]

    delta = math.lcm(*[abs(a.row[col]) for a in mentions])
    # scale every mention so the bound variable's coefficient is +-delta,
    # then read it as a fresh variable y with y === 0 mod delta
    lowers: list[tuple[Row, int]] = []   # y >= row + const
    uppers: list[tuple[Row, int]] = []   # y <= row + const
    congs: list[tuple[int, Row, int, int]] = []  # sign, row, const, modulus (on y)
    for a in mentions:
        k = a.row[col]
        s = delta // abs(k)
        row = list(_row_scale(a.row, s))
        row[col] = 0
        row = tuple(row)
        const = s * a.const
        if isinstance(a, Ineq):
            if k > 0:  # delta*y' ... (+y + row + const >= 0) => y >= -row - const
                lowers.append((_row_scale(row, -1), -const))
            else:
                uppers.append((row, const))
            continue
        congs.append((1 if k > 0 else -1, row, const, a.modulus * s))

    big_d = math.lcm(delta, *[d for _, _, _, d in congs]) if congs else delta
    if big_d > MAX_MODULUS:
        raise ResourceError(f"eliminated-variable period {big_d} exceeds cap {MAX_MODULUS}")

    ncols = len(dj.ineqs[0].row) if dj.ineqs else len(dj.congs[0].row)
    zero_row = (0,) * ncols

    def with_y(value_row: Row, value_const: int) -> Conjunct | None:
        ineqs = list(keep_i)
        congs_out = list(keep_c)
        # y === 0 mod delta
        if delta > 1:
            congs_out.append(CongAtom(value_row, value_const, delta))
        for row, const in lowers:  # y >= row + const
            ineqs.append(Ineq(_row_add(value_row, _row_scale(row, -1)),
                              value_const - const))
        for row, const in uppers:  # y <= row + const
            ineqs.append(Ineq(_row_add(row, _row_scale(value_row, -1)),
                              const - value_const))
        for sign, row, const, d in congs:  # sign*y + row + const === 0 mod d
            congs_out.append(CongAtom(_row_add(_row_scale(value_row, sign), row),
                                      sign * value_const + const, d))
        return _simplify_conjunct(ineqs, congs_out)

    out: list[Conjunct] = []
    # minus-infinity branch: only congruences constrain y, lower bounds fail
    if not lowers:
        for j in range(big_d):
            ineqs = list(keep_i)
            congs_out = list(keep_c)
            if delta > 1:
                congs_out.append(CongAtom(zero_row, j, delta))
            for sign, row, const, d in congs:
                congs_out.append(CongAtom(row, sign * j + const, d))
            c = _simplify_conjunct(ineqs, congs_out)
            if c is not None:
                out.append(c)
    # boundary branches: y = (lower bound) + j
    for row, const in lowers:
        for j in range(big_d):
            c = with_y(row, const + j)
            if c is not None:
                out.append(c)
            if len(out) > MAX_DISJUNCTS:
                raise ResourceError("DNF blowup exceeded disjunct cap")
    return out


def _eliminate(tree) -> list[Conjunct]:
    """Bottom-up elimination; returns a DNF over all columns."""
    tree = _nnf(tree, True)
    kind = tree[0]
    if kind == "true":
        return [Conjunct((), ())]
    if kind == "false":
        return []
    if kind == "atom":
        c = _simplify_conjunct([tree[1]] if isinstance(tree[1], Ineq) else [],
                               [tree[1]] if isinstance(tree[1], CongAtom) else [])
        return [c] if c is not None else []
    if kind == "and":
        return _dnf_and(_eliminate(tree[1]), _eliminate(tree[2]))
    if kind == "or":
        out = _eliminate(tree[1]) + _eliminate(tree[2])
        if len(out) > MAX_DISJUNCTS:
            raise ResourceError("DNF blowup exceeded disjunct cap")
        return out
    if kind == "not":
        # only wraps an exists at this point; eliminate inside, then negate
        inner = _eliminate(tree[1])
        return _negate_dnf(inner)
    if kind == "exists":
        body = _eliminate(tree[2])
        out = []
        for dj in body:
            out.extend(_cooper_eliminate(dj, tree[1]))
            if len(out) > MAX_DISJUNCTS:
                raise ResourceError("DNF blowup exceeded disjunct cap")
        return out
    raise AssertionError(kind)


def _negate_dnf(djs: list[Conjunct]) -> list[Conjunct]:
    """Complement of a DNF, as a DNF (conjunction of negated disjuncts)."""
    result = [Conjunct((), ())]
    for dj in djs:
        alts: list[Conjunct] = []
        for a in dj.ineqs:
            c = _simplify_conjunct([Ineq(_row_scale(a.row, -1), -a.const - 1)], [])
            if c is not None:
                alts.append(c)
        for a in dj.congs:
            for j in range(1, a.modulus):
                c = _simplify_conjunct([], [CongAtom(a.row, a.const + j, a.modulus)])
                if c is not None:
                    alts.append(c)
        result = _dnf_and(result, alts)
        if not result:
            return []
    return result


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def presburger_qe(f: sx.Formula | PresburgerSet,
                  declared: dict[str, sx.Sort] | None = None,
                  varnames: tuple[str, ...] | None = None) -> PresburgerSet:
    """Equivalent quantifier-free set; membership agrees on all of Z^r."""
    if isinstance(f, PresburgerSet):
        return f
    sig = validate_zz_fragment(f, declared)
    names = varnames if varnames is not None else sig.names()
    for n in sig.names():
        if n not in names:
            raise SortError(f"free variable {n!r} missing from the variable order")

    def count_quants(node) -> int:
        if isinstance(node, sx.Quant):
            return 1 + count_quants(node.body)
        total = 0
        for attr in ("left", "right", "arg"):
            child = getattr(node, attr, None)
            if child is not None and isinstance(child, sx.Formula | sx.Term):
                total += count_quants(child)
        return total

    nfree = len(names)
    ncols = nfree + count_quants(f)
    cols = {n: i for i, n in enumerate(names)}
    tree = _build_tree(f, cols, [nfree], ncols)
    djs = _eliminate(tree)
    # bound columns are gone; project rows down to the free columns
    out: list[Conjunct] = []
    for dj in djs:
        ineqs = []
        for a in dj.ineqs:
            assert all(c == 0 for c in a.row[nfree:]), "bound variable leaked"
            ineqs.append(Ineq(a.row[:nfree], a.const))
        congs = []
        for a in dj.congs:
            assert all(c == 0 for c in a.row[nfree:]), "bound variable leaked"
            congs.append(CongAtom(a.row[:nfree], a.const, a.modulus))
        c = _simplify_conjunct(ineqs, congs)
        if c is not None:
            out.append(c)
    uniq = sorted(set(out), key=lambda d: (d.ineqs, d.congs))
    return PresburgerSet(tuple(names), tuple(uniq))


def pres_eval(f: sx.Formula | PresburgerSet, point: tuple[int, ...],
              declared: dict[str, sx.Sort] | None = None) -> bool:
    """Truth of a ZZ-fragment formula or normal-form set at a point."""
    if isinstance(f, PresburgerSet):
        return f.contains(point)
    return presburger_qe(f, declared).contains(point)


def normalize_1d(s: PresburgerSet) -> list[Progression1D]:
    """Decompose a one-variable set into progressions and points.

    The union of the returned entries equals the set; entries are maximal
    (no entry can be absorbed into or merged with another single
    progression).  Beyond the largest inequality threshold membership is
    periodic, which makes the decomposition exact rather than sampled.
    """
    if s.r != 1:
        raise ValueError("normalize_1d needs a one-variable set")
    if not s.disjuncts:
        return []

    moduli = [a.modulus for dj in s.disjuncts for a in dj.congs]
    period = math.lcm(*moduli) if moduli else 1
    bounds = [0]
    for dj in s.disjuncts:
        for a in dj.ineqs:
            c = a.row[0]
            if c != 0:
                bounds.append(abs(-a.const // c) + 1)
    b_edge = max(bounds)

    @lru_cache(maxsize=None)
    def member(x: int) -> bool:
        return s.contains((x,))

    lo_limit = -b_edge - 2 * period
    hi_limit = b_edge + 2 * period

    plus_rep = {}
    minus_rep = {}
    for x in range(b_edge + 1, b_edge + period + 1):
        plus_rep[x % period] = x
    for x in range(-b_edge - period, -b_edge):
        minus_rep[x % period] = x

    progs: list[Progression1D] = []
    two_sided: set[int] = set()
    for rho, x0 in sorted(plus_rep.items()):
        if not member(x0):
            continue
        b = x0
        while b - period >= lo_limit and member(b - period):
            b -= period
        if b - period < lo_limit and member(b - period) and member(minus_rep[rho]):
            # runs into the downward periodic zone: the class is two-sided
            base = rho % period
            progs.append(Progression1D(base, period, "+"))
            progs.append(Progression1D(base - period, period, "-"))
            two_sided.add(rho)
        else:
            progs.append(Progression1D(b, period, "+"))
    for rho, x0 in sorted(minus_rep.items()):
        if rho in two_sided or not member(x0):
            continue
        b = x0
        while b + period <= hi_limit and member(b + period):
            b += period
        progs.append(Progression1D(b, period, "-"))

    progs = _merge_progressions(progs)
    points = [x for x in range(lo_limit, hi_limit + 1)
              if member(x) and not any(p.contains(x) for p in progs)]
    entries = progs + [Progression1D(x, 0, "point") for x in points]
    return sorted(entries, key=lambda e: (e.direction, e.base, e.step))


def _merge_progressions(progs: list[Progression1D]) -> list[Progression1D]:
    """Coalesce same-direction progressions whose union is one progression."""
    out: list[Progression1D] = []
    for direction in ("+", "-"):
        group = [p for p in progs if p.direction == direction]
        by_step: dict[int, list[int]] = {}
        for p in group:
            by_step.setdefault(p.step, []).append(p.base)
        for step, bases in sorted(by_step.items()):
            bases = sorted(bases, reverse=(direction == "-"))
            i = 0
            while i < len(bases):
                merged = False
                if i + 1 < len(bases):
                    g = abs(bases[i + 1] - bases[i])
                    if g and step % g == 0:
                        k = step // g
                        run = bases[i:i + k]
                        if len(run) == k and all(
                                abs(run[j + 1] - run[j]) == g for j in range(k - 1)):
                            out.append(Progression1D(run[0], g, direction))
                            i += k
                            merged = True
                if not merged:
                    out.append(Progression1D(bases[i], step, direction))
                    i += 1
    return out


def set_to_formula(s: PresburgerSet) -> sx.Formula:
    """Render a normal-form set back into the shared grammar."""

    def term_of(row: Row, const: int) -> sx.Term:
        t: sx.Term | None = None
        for c, name in zip(row, s.varnames):
            if c == 0:
                continue
            piece: sx.Term = sx.Var(name) if abs(c) == 1 else sx.Mul(sx.IntLit(abs(c)), sx.Var(name))
            if c < 0:
                piece = sx.Neg(piece)
            t = piece if t is None else sx.Add(t, piece)
        ct = sx.IntLit(const) if const >= 0 else sx.Neg(sx.IntLit(-const))
        if t is None:
            return ct
        if const == 0:
            return t
        return sx.Add(t, ct)

    def conj_formula(dj: Conjunct) -> sx.Formula:
        parts: list[sx.Formula] = []
        for a in dj.ineqs:
            parts.append(sx.Le(sx.IntLit(0), term_of(a.row, a.const)))
        for a in dj.congs:
            parts.append(sx.Cong(term_of(a.row, a.const), sx.IntLit(0), a.modulus))
        if not parts:
            return sx.Eq(sx.IntLit(0), sx.IntLit(0))
        f = parts[0]
        for p in parts[1:]:
            f = sx.And(f, p)
        return f

    if not s.disjuncts:
        return sx.Eq(sx.IntLit(0), sx.IntLit(1))
    f = conj_formula(s.disjuncts[0])
    for dj in s.disjuncts[1:]:
        f = sx.Or(f, conj_formula(dj))
    return f
