"""AST, concrete grammar, parser and sort checker for a three-sorted logic of
valued fields.

Sorts
    VF  valued field (a local field F)
    RF  residue field (F_p here)
    ZZ  value group (the integers)

Term formers: ring operations ``+ * -`` within VF and RF, Presburger ``+ -``
in ZZ, the two cross-sort maps ``ord : VF -> ZZ`` and ``ac : VF -> RF``, the
uniformizer constant ``t`` (sort VF), and integer literals, which are
sort-polymorphic and resolved by inference.  Multiplying two ZZ terms is
rejected unless one side is a literal integer; a literal times a ZZ term is
shorthand for iterated addition, so the ZZ fragment stays Presburger.

Formula formers: ``=`` between same-sort terms, ``<=`` and the congruences
``s === t mod d`` (d a literal >= 2) between ZZ terms, ``/\\  \\/  ~`` and
sorted quantifiers ``exists x:VF (...)`` / ``forall x:ZZ (...)``.

Formula files consist of ``var <name> : <VF|RF|ZZ>`` header lines declaring
free-variable sorts followed by ``formula <name> := <text>`` lines.  ``#``
starts a comment.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from .errors import FormulaSyntaxError, SortError


class Sort(enum.Enum):
    VF = "VF"
    RF = "RF"
    ZZ = "ZZ"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Unif:
    """The uniformizer constant symbol ``t``."""


@dataclass(frozen=True)
class Add:
    left: Term
    right: Term


@dataclass(frozen=True)
class Mul:
    left: Term
    right: Term


@dataclass(frozen=True)
class Neg:
    arg: Term


@dataclass(frozen=True)
class Ord:
    arg: Term


@dataclass(frozen=True)
class Ac:
    arg: Term


Term = Var | IntLit | Unif | Add | Mul | Neg | Ord | Ac


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Le:
    left: Term
    right: Term


@dataclass(frozen=True)
class Cong:
    left: Term
    right: Term
    modulus: int


@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not:
    arg: Formula


@dataclass(frozen=True)
class Quant:
    kind: str  # "exists" | "forall"
    var: str
    sort: Sort
    body: Formula


Formula = Eq | Le | Cong | And | Or | Not | Quant

ATOMS = (Eq, Le, Cong)


@dataclass(frozen=True)
class Signature:
    """Ordered free variables of a formula with their inferred sorts."""

    free: tuple[tuple[str, Sort], ...]

    @property
    def n(self) -> int:
        return sum(1 for _, s in self.free if s is Sort.VF)

    @property
    def m(self) -> int:
        return sum(1 for _, s in self.free if s is Sort.RF)

    @property
    def r(self) -> int:
        return sum(1 for _, s in self.free if s is Sort.ZZ)

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.n, self.m, self.r)

    def sort_of(self, name: str) -> Sort:
        for v, s in self.free:
            if v == name:
                return s
        raise KeyError(name)

    def names(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.free)


# ---------------------------------------------------------------------------
# Free variables
# ---------------------------------------------------------------------------

def free_vars(f: Formula | Term, bound: frozenset[str] = frozenset()) -> list[str]:
    """Free variable names in first-occurrence (pre-order) order."""
    out: list[str] = []

    def walk(node, bound):
        if isinstance(node, Var):
            if node.name not in bound and node.name not in out:
                out.append(node.name)
        elif isinstance(node, (IntLit, Unif)):
            pass
        elif isinstance(node, (Add, Mul, Eq, Le, And, Or)):
            walk(node.left, bound)
            walk(node.right, bound)
        elif isinstance(node, Cong):
            walk(node.left, bound)
            walk(node.right, bound)
        elif isinstance(node, (Neg, Ord, Ac, Not)):
            walk(node.arg, bound)
        elif isinstance(node, Quant):
            walk(node.body, bound | {node.var})
        else:
            raise TypeError(f"not an AST node: {node!r}")

    walk(f, bound)
    return out


def var_occurs(f: Formula | Term, name: str) -> bool:
    return name in free_vars(f)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r\n]+)
      | (?P<comment>\#[^\n]*)
      | (?P<int>\d+)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>===|<=|>=|:=|/\\|\\/|[()+\-*=~:,])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"exists", "forall", "ord", "ac", "mod"}


@dataclass(frozen=True)
class _Tok:
    kind: str  # "int" | "name" | "op" | "kw" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            k = kind
            if kind == "name" and lexeme in _KEYWORDS:
                k = "kw"
            toks.append(_Tok(k, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser (recursive descent)
#
#   formula  := or
#   or       := and ( "\/" and )*
#   and      := unary ( "/\" unary )*
#   unary    := "~" unary
#             | ("exists"|"forall") NAME ":" SORT unary
#             | "(" formula ")"        -- backtracks to a term comparison
#             | comparison
#   comparison := term ( "=" term | "<=" term | ">=" term
#                      | "===" term "mod" INT )
#   term     := addend ( ("+"|"-") addend )*
#   addend   := factor ( "*" factor )*
#   factor   := "-" factor | INT | "t" | NAME
#             | "ord" "(" term ")" | "ac" "(" term ")" | "(" term ")"
#
# ">=" is accepted as sugar and stored flipped; the formatter only emits "<=".
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self, ahead: int = 0) -> _Tok:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            raise FormulaSyntaxError(f"expected {want!r}, found {t.text or 'end of input'!r}",
                                     t.line, t.col)
        return self.next()

    def fail(self, msg: str) -> None:
        t = self.peek()
        raise FormulaSyntaxError(msg + f", found {t.text or 'end of input'!r}", t.line, t.col)

    # formulas ------------------------------------------------------------

    def formula(self) -> Formula:
        f = self.conj()
        while self.peek().kind == "op" and self.peek().text == "\\/":
            self.next()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek().kind == "op" and self.peek().text == "/\\":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        t = self.peek()
        if t.kind == "op" and t.text == "~":
            self.next()
            return Not(self.unary())
        if t.kind == "kw" and t.text in ("exists", "forall"):
            self.next()
            name = self.expect("name").text
            self.expect("op", ":")
            stok = self.expect("name")
            try:
                sort = Sort(stok.text)
            except ValueError:
                raise FormulaSyntaxError(f"unknown sort {stok.text!r}", stok.line, stok.col)
            return Quant(t.text, name, sort, self.unary())
        if t.kind == "op" and t.text == "(":
            # Either a parenthesized formula or a parenthesized term starting
            # a comparison; try the formula reading first and backtrack.
            mark = self.i
            self.next()
            try:
                f = self.formula()
                self.expect("op", ")")
            except FormulaSyntaxError:
                self.i = mark
                return self.comparison()
            if self.peek().kind == "op" and self.peek().text in ("=", "<=", ">=", "==="):
                self.i = mark
                return self.comparison()
            return f
        return self.comparison()

    def comparison(self) -> Formula:
        lhs = self.term()
        t = self.peek()
        if t.kind == "op" and t.text == "=":
            self.next()
            return Eq(lhs, self.term())
        if t.kind == "op" and t.text == "<=":
            self.next()
            return Le(lhs, self.term())
        if t.kind == "op" and t.text == ">=":
            self.next()
            return Le(self.term(), lhs)
        if t.kind == "op" and t.text == "===":
            self.next()
            rhs = self.term()
            self.expect("kw", "mod")
            d = self.expect("int")
            return Cong(lhs, rhs, int(d.text))
        self.fail("expected a comparison operator")

    # terms ---------------------------------------------------------------

    def term(self) -> Term:
        a = self.addend()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.next().text
            b = self.addend()
            a = Add(a, b) if op == "+" else Add(a, Neg(b))
        return a

    def addend(self) -> Term:
        a = self.factor()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.next()
            a = Mul(a, self.factor())
        return a

    def factor(self) -> Term:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.next()
            return Neg(self.factor())
        if t.kind == "int":
            self.next()
            return IntLit(int(t.text))
        if t.kind == "kw" and t.text in ("ord", "ac"):
            self.next()
            self.expect("op", "(")
            arg = self.term()
            self.expect("op", ")")
            return Ord(arg) if t.text == "ord" else Ac(arg)
        if t.kind == "name":
            self.next()
            if t.text == "t":
                return Unif()
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            self.next()
            inner = self.term()
            self.expect("op", ")")
            return inner
        self.fail("expected a term")


def parse_formula(text: str) -> Formula:
    """Parse formula source text into an AST.

    Raises FormulaSyntaxError with the offending position.  Sorts are not
    resolved here; run :func:`typecheck` on the result.
    """
    p = _Parser(_tokenize(text))
    f = p.formula()
    tok = p.peek()
    if tok.kind != "eof":
        raise FormulaSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return f


def parse_term(text: str) -> Term:
    p = _Parser(_tokenize(text))
    t = p.term()
    tok = p.peek()
    if tok.kind != "eof":
        raise FormulaSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return t


# ---------------------------------------------------------------------------
# Formatter.  format(parse(s)) need not equal s, but parse(format(f)) == f.
# ---------------------------------------------------------------------------

def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntLit):
        return str(t.value)
    if isinstance(t, Unif):
        return "t"
    if isinstance(t, Add):
        return f"({format_term(t.left)} + {format_term(t.right)})"
    if isinstance(t, Mul):
        return f"({format_term(t.left)} * {format_term(t.right)})"
    if isinstance(t, Neg):
        return f"(- {format_term(t.arg)})"
    if isinstance(t, Ord):
        return f"ord({format_term(t.arg)})"
    if isinstance(t, Ac):
        return f"ac({format_term(t.arg)})"
    raise TypeError(f"not a term: {t!r}")


def format_formula(f: Formula) -> str:
    if isinstance(f, Eq):
        return f"{format_term(f.left)} = {format_term(f.right)}"
    if isinstance(f, Le):
        return f"{format_term(f.left)} <= {format_term(f.right)}"
    if isinstance(f, Cong):
        return f"{format_term(f.left)} === {format_term(f.right)} mod {f.modulus}"
    if isinstance(f, And):
        return f"({format_formula(f.left)} /\\ {format_formula(f.right)})"
    if isinstance(f, Or):
        return f"({format_formula(f.left)} \\/ {format_formula(f.right)})"
    if isinstance(f, Not):
        return f"~({format_formula(f.arg)})"
    if isinstance(f, Quant):
        return f"{f.kind} {f.var}:{f.sort} ({format_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Sort inference / checking.
#
# Every term node gets a slot in a union-find structure; ring operations unify
# their operands with the node, ord/ac pin their argument to VF, comparisons
# unify both sides, <= and === pin ZZ.  Integer literals stay polymorphic
# until unification resolves them; a component with no anchor at all (only
# literals) defaults to ZZ.  A free variable whose sort is not pinned by any
# declaration or use is an error rather than a guess.
# ---------------------------------------------------------------------------

class _Slot:
    __slots__ = ("parent", "sort")

    def __init__(self):
        self.parent: _Slot | None = None
        self.sort: Sort | None = None

    def find(self) -> _Slot:
        s = self
        while s.parent is not None:
            s = s.parent
        # path compression
        t = self
        while t.parent is not None:
            nxt = t.parent
            t.parent = s
            t = nxt
        return s


def _unify(a: _Slot, b: _Slot, where: str) -> None:
    ra, rb = a.find(), b.find()
    if ra is rb:
        return
    if ra.sort is not None and rb.sort is not None and ra.sort is not rb.sort:
        raise SortError(f"sort mismatch in {where}: {ra.sort} vs {rb.sort}")
    if ra.sort is None:
        ra.sort = rb.sort
    rb.parent = ra


def _pin(slot: _Slot, sort: Sort, where: str) -> None:
    r = slot.find()
    if r.sort is not None and r.sort is not sort:
        raise SortError(f"sort mismatch in {where}: expected {sort}, found {r.sort}")
    r.sort = sort


def _is_literal_tree(t: Term) -> bool:
    if isinstance(t, IntLit):
        return True
    if isinstance(t, Neg):
        return _is_literal_tree(t.arg)
    if isinstance(t, (Add, Mul)):
        return _is_literal_tree(t.left) and _is_literal_tree(t.right)
    return False


class _Checker:
    def __init__(self, declared: dict[str, Sort]):
        self.declared = dict(declared)
        self.var_slots: dict[str, _Slot] = {}
        self.order: list[str] = []
        self.mul_nodes: list[tuple[Mul, _Slot]] = []

    def var_slot(self, name: str, env: dict[str, _Slot]) -> _Slot:
        if name in env:
            return env[name]
        if name not in self.var_slots:
            slot = _Slot()
            if name in self.declared:
                slot.sort = self.declared[name]
            self.var_slots[name] = slot
            self.order.append(name)
        return self.var_slots[name]

    def term(self, t: Term, env: dict[str, _Slot]) -> _Slot:
        where = format_term(t)
        if isinstance(t, Var):
            return self.var_slot(t.name, env)
        if isinstance(t, IntLit):
            return _Slot()
        if isinstance(t, Unif):
            s = _Slot()
            s.sort = Sort.VF
            return s
        if isinstance(t, Add):
            a = self.term(t.left, env)
            b = self.term(t.right, env)
            _unify(a, b, where)
            return a
        if isinstance(t, Mul):
            a = self.term(t.left, env)
            b = self.term(t.right, env)
            _unify(a, b, where)
            self.mul_nodes.append((t, a))
            return a
        if isinstance(t, Neg):
            return self.term(t.arg, env)
        if isinstance(t, Ord):
            a = self.term(t.arg, env)
            _pin(a, Sort.VF, where)
            s = _Slot()
            s.sort = Sort.ZZ
            return s
        if isinstance(t, Ac):
            a = self.term(t.arg, env)
            _pin(a, Sort.VF, where)
            s = _Slot()
            s.sort = Sort.RF
            return s
        raise TypeError(f"not a term: {t!r}")

    def formula(self, f: Formula, env: dict[str, _Slot]) -> None:
        if isinstance(f, Eq):
            a = self.term(f.left, env)
            b = self.term(f.right, env)
            _unify(a, b, format_formula(f))
        elif isinstance(f, (Le, Cong)):
            a = self.term(f.left, env)
            b = self.term(f.right, env)
            _pin(a, Sort.ZZ, format_formula(f))
            _pin(b, Sort.ZZ, format_formula(f))
            if isinstance(f, Cong) and f.modulus < 2:
                raise SortError(f"congruence modulus must be >= 2, got {f.modulus}")
        elif isinstance(f, And) or isinstance(f, Or):
            self.formula(f.left, env)
            self.formula(f.right, env)
        elif isinstance(f, Not):
            self.formula(f.arg, env)
        elif isinstance(f, Quant):
            slot = _Slot()
            slot.sort = f.sort
            self.formula(f.body, {**env, f.var: slot})
        else:
            raise TypeError(f"not a formula: {f!r}")


def typecheck(f: Formula, declared: dict[str, Sort] | None = None) -> Signature:
    """Check sort correctness and return the signature of free variables.

    ``declared`` optionally pins the sorts of free variables (as a formula
    file header would); sorts left open by both declaration and use raise
    SortError instead of being guessed.
    """
    ck = _Checker(declared or {})
    ck.formula(f, {})
    free: list[tuple[str, Sort]] = []
    for name in ck.order:
        slot = ck.var_slots[name].find()
        if slot.sort is None:
            raise SortError(f"cannot infer the sort of free variable {name!r}; declare it")
        free.append((name, slot.sort))
    # Presburger restriction: ZZ multiplication only with a literal side.
    for node, slot in ck.mul_nodes:
        if slot.find().sort is Sort.ZZ:
            if not (_is_literal_tree(node.left) or _is_literal_tree(node.right)):
                raise SortError(
                    f"multiplication of two ZZ terms in {format_term(node)}; "
                    "only literal * term is allowed in the value-group sort")
    return Signature(tuple(free))


def term_sort(t: Term, env: dict[str, Sort]) -> Sort | None:
    """Sort of a term given variable sorts, or None when only literals occur.

    Assumes the enclosing formula already typechecked, so the first anchor
    found is the sort of the whole (unified) component.
    """
    if isinstance(t, Var):
        return env.get(t.name)
    if isinstance(t, IntLit):
        return None
    if isinstance(t, Unif):
        return Sort.VF
    if isinstance(t, (Add, Mul)):
        return term_sort(t.left, env) or term_sort(t.right, env)
    if isinstance(t, Neg):
        return term_sort(t.arg, env)
    if isinstance(t, Ord):
        return Sort.ZZ
    if isinstance(t, Ac):
        return Sort.RF
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Formula files
# ---------------------------------------------------------------------------

@dataclass
class FormulaFile:
    declared: dict[str, Sort] = field(default_factory=dict)
    formulas: dict[str, Formula] = field(default_factory=dict)

    def signature(self, name: str) -> Signature:
        return typecheck(self.formulas[name], self.declared)


def parse_formula_file(text: str) -> FormulaFile:
    """Parse a formula file: ``var`` declarations then named formulas."""
    out = FormulaFile()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("var "):
            m = re.fullmatch(r"var\s+([A-Za-z_][A-Za-z_0-9]*)\s*:\s*(VF|RF|ZZ)", line)
            if not m:
                raise FormulaSyntaxError("malformed var declaration", lineno, 1)
            if m.group(1) == "t":
                raise FormulaSyntaxError("'t' is the uniformizer constant, not a variable",
                                         lineno, 1)
            out.declared[m.group(1)] = Sort(m.group(2))
        elif line.startswith("formula "):
            m = re.fullmatch(r"formula\s+([A-Za-z_][A-Za-z_0-9]*)\s*:=\s*(.+)", line)
            if not m:
                raise FormulaSyntaxError("malformed formula line", lineno, 1)
            try:
                out.formulas[m.group(1)] = parse_formula(m.group(2))
            except FormulaSyntaxError as e:
                raise FormulaSyntaxError(f"in formula {m.group(1)!r}: {e}", lineno, 1)
        else:
            raise FormulaSyntaxError(f"unrecognized line {line!r}", lineno, 1)
    for name, f in out.formulas.items():
        typecheck(f, out.declared)
    return out
