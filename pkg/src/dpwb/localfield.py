"""Truncated-precision arithmetic for the two model families Q_p and F_p((t)).

Elements are stored as a valuation plus a window of expansion digits in
[0, p).  An element is *exact* when its digits determine it completely:
for F_p((t)) that means a finite Laurent polynomial in t, for Q_p the
element carries an exact rational value alongside its digit window.
Constants embedded from integer polynomials in t, and the ball
representatives produced by :func:`enumerate_ball`, are always exact, so
formula evaluation at enumerated points is not polluted by spurious
precision loss.  Arithmetic on inexact operands propagates the known
window and raises :class:`PrecisionError` when cancellation consumes
every known digit, rather than guessing.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import InputError, OrdOfZeroError, PrecisionError


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def valp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class FieldDesc:
    """A model of a local field: Q_p (mixed characteristic) or F_p((t))."""

    family: str  # "Qp" | "FpT"
    p: int
    N: int = 12  # digits of working precision

    def __post_init__(self):
        if self.family not in ("Qp", "FpT"):
            raise InputError(f"unknown field family {self.family!r}")
        if not _is_prime(self.p):
            raise InputError(f"residue characteristic {self.p} is not prime")
        if self.N < 2:
            raise InputError("working precision N must be at least 2")

    @property
    def q(self) -> int:
        """Cardinality of the residue field (always p here)."""
        return self.p

    @property
    def mixed_char(self) -> bool:
        return self.family == "Qp"

    def uniformizer(self) -> "VFElem":
        return embed_constant(self, [0, 1])

    def __str__(self) -> str:
        return f"{self.family}({self.p},N={self.N})"


@dataclass(frozen=True)
class RFElem:
    """Residue field element; arithmetic mod p."""

    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p)

    def __add__(self, other: "RFElem") -> "RFElem":
        return RFElem(self.value + other.value, self.p)

    def __mul__(self, other: "RFElem") -> "RFElem":
        return RFElem(self.value * other.value, self.p)

    def __neg__(self) -> "RFElem":
        return RFElem(-self.value, self.p)

    def __str__(self) -> str:
        return f"{self.value}~{self.p}"


@dataclass(frozen=True)
class VFElem:
    """Valued-field element: valuation + digit window, or exact zero.

    Invariants: unless exact_zero, digits is nonempty with digits[0] != 0
    and every digit in [0, p).  If ``exact`` the element equals
    sum(digits[i] * w^(v+i)) in F_p((t)), resp. the rational ``val`` in
    Q_p (digits then cache the leading window of its expansion).
    """

    fd: FieldDesc
    exact_zero: bool
    v: int
    digits: tuple[int, ...]
    exact: bool
    val: Fraction | None = None  # exact rational backing, Q_p only

    # -- inspection -------------------------------------------------------

    @property
    def prec(self) -> int | None:
        """Number of known digits; None means all (exact)."""
        return None if (self.exact or self.exact_zero) else len(self.digits)

    @property
    def end(self) -> int | None:
        """First index at which the expansion is unknown; None if exact."""
        return None if (self.exact or self.exact_zero) else self.v + len(self.digits)

    def digit_at(self, i: int) -> int:
        """Expansion digit at absolute index i."""
        if self.exact_zero:
            return 0
        if i < self.v:
            return 0
        j = i - self.v
        if j < len(self.digits):
            return self.digits[j]
        if self.exact:
            if self.fd.family == "FpT":
                return 0
            return _qp_digit(self.fd, self.val, self.v, j)
        raise PrecisionError(f"digit {i} beyond precision window", known_valuation=self.end)

    def __repr__(self) -> str:
        if self.exact_zero:
            return f"<{self.fd} 0!>"
        ds = ",".join(map(str, self.digits))
        tag = "" if self.exact else ",..."
        extra = f" ={self.val}" if (self.exact and self.fd.family == "Qp") else ""
        return f"<{self.fd} v={self.v}; {ds}{tag}{extra}>"

    def to_literal(self) -> str:
        """Element literal in the CLI syntax."""
        if self.exact_zero:
            return "0!"
        head = f"{self.fd.family}({self.fd.p},N={self.fd.N})"
        if self.exact and self.fd.family == "Qp":
            return f"{head}{{exact={self.val}}}"
        ds = ",".join(map(str, self.digits))
        tail = "" if self.exact else ",..."
        return f"{head}{{v={self.v}; {ds}{tail}}}"


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------

def _qp_digit(fd: FieldDesc, val: Fraction, v: int, j: int) -> int:
    u = _qp_window_int(fd, val, v, j + 1)
    return (u >> 0) // fd.p**j % fd.p


def _qp_window_int(fd: FieldDesc, val: Fraction, lo: int, width: int) -> int:
    """Integer congruent to val * p^(-lo) modulo p^width (val has ord >= lo)."""
    p = fd.p
    num, den = val.numerator, val.denominator
    vn = valp(num, p)
    num //= p**vn
    vd = valp(den, p) if den % p == 0 else 0
    den //= p**vd
    shift = vn - vd - lo
    assert shift >= 0
    m = p**width
    return num * pow(den, -1, m) * pow(p, shift, m) % m


def _int_digits(u: int, p: int, count: int) -> tuple[int, ...]:
    out = []
    for _ in range(count):
        u, r = divmod(u, p)
        out.append(r)
    return tuple(out)


def vf_zero(fd: FieldDesc) -> VFElem:
    return VFElem(fd, True, 0, (), True, Fraction(0) if fd.family == "Qp" else None)


def _exact_qp(fd: FieldDesc, val: Fraction) -> VFElem:
    if val == 0:
        return vf_zero(fd)
    p = fd.p
    v = valp(val.numerator, p) - (valp(val.denominator, p) if val.denominator % p == 0 else 0)
    u = _qp_window_int(fd, val, v, fd.N)
    return VFElem(fd, False, v, _int_digits(u, p, fd.N), True, val)


def _exact_fpt(fd: FieldDesc, v: int, coeffs: Sequence[int]) -> VFElem:
    cs = [c % fd.p for c in coeffs]
    lead = next((i for i, c in enumerate(cs) if c), None)
    if lead is None:
        return vf_zero(fd)
    last = max(i for i, c in enumerate(cs) if c)
    return VFElem(fd, False, v + lead, tuple(cs[lead:last + 1]), True)


def _trunc(fd: FieldDesc, v: int, digits: Sequence[int]) -> VFElem:
    ds = tuple(digits)
    assert ds and ds[0] != 0 and all(0 <= d < fd.p for d in ds)
    return VFElem(fd, False, v, ds[: fd.N], False)


def embed_constant(fd: FieldDesc, poly: int | Sequence[int]) -> VFElem:
    """Interpret an integer polynomial in t as a field element.

    Integers map through the canonical ring map (identity into Z_p,
    reduction mod p into F_p((t))); t maps to the uniformizer.
    """
    coeffs = [poly] if isinstance(poly, int) else list(poly)
    if not all(isinstance(c, int) for c in coeffs):
        raise InputError("constant polynomial coefficients must be integers")
    if fd.family == "Qp":
        val = sum(Fraction(c) * fd.p**i for i, c in enumerate(coeffs))
        return _exact_qp(fd, Fraction(val))
    return _exact_fpt(fd, 0, coeffs)


def qp_from_fraction(fd: FieldDesc, val: Fraction | int) -> VFElem:
    """Exact element of Q_p from a rational (denominator may involve p)."""
    if fd.family != "Qp":
        raise InputError("rational backing is only meaningful for Qp")
    return _exact_qp(fd, Fraction(val))


def fpt_from_coeffs(fd: FieldDesc, v: int, coeffs: Sequence[int]) -> VFElem:
    """Exact element of F_p((t)): sum coeffs[i] * t^(v+i)."""
    if fd.family != "FpT":
        raise InputError("Laurent coefficients are only meaningful for FpT")
    return _exact_fpt(fd, v, coeffs)


def make_truncated(fd: FieldDesc, v: int, digits: Sequence[int]) -> VFElem:
    """Element known only through the given digit window."""
    ds = [d % fd.p for d in digits]
    if fd.family == "Qp":
        u = sum(d * fd.p**i for i, d in enumerate(digits))
        width = len(digits)
        u %= fd.p**width
        if u == 0:
            raise PrecisionError("all digits of a truncated literal are zero",
                                 known_valuation=v + width)
        w = valp(u, fd.p)
        return _trunc(fd, v + w, _int_digits(u // fd.p**w, fd.p, min(width - w, fd.N)))
    lead = next((i for i, c in enumerate(ds) if c), None)
    if lead is None:
        raise PrecisionError("all digits of a truncated literal are zero",
                             known_valuation=v + len(ds))
    return _trunc(fd, v + lead, ds[lead:])


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------

def _window_int(x: VFElem, lo: int, width: int) -> int:
    """Integer congruent to x * p^(-lo) mod p^width (Qp only, lo <= x.v)."""
    fd = x.fd
    if x.exact_zero:
        return 0
    if x.exact:
        return _qp_window_int(fd, x.val, lo, width)
    u = 0
    for i, d in enumerate(x.digits):
        if x.v - lo + i >= width:
            break
        u += d * fd.p ** (x.v - lo + i)
    return u % fd.p**width


def _window_coeffs(x: VFElem, lo: int, width: int) -> list[int]:
    """FpT digits of x on [lo, lo+width)."""
    return [x.digit_at(i) for i in range(lo, lo + width)]


def vf_neg(x: VFElem) -> VFElem:
    fd = x.fd
    if x.exact_zero:
        return x
    if fd.family == "Qp":
        if x.exact:
            return _exact_qp(fd, -x.val)
        prec = len(x.digits)
        u = sum(d * fd.p**i for i, d in enumerate(x.digits))
        return _trunc(fd, x.v, _int_digits((-u) % fd.p**prec, fd.p, prec))
    ds = tuple((-d) % fd.p for d in x.digits)
    if x.exact:
        return _exact_fpt(fd, x.v, ds)
    return _trunc(fd, x.v, ds)


def vf_add(x: VFElem, y: VFElem) -> VFElem:
    fd = x.fd
    assert fd == y.fd, "operands from different fields"
    if x.exact_zero:
        return y
    if y.exact_zero:
        return x
    if x.exact and y.exact:
        if fd.family == "Qp":
            return _exact_qp(fd, x.val + y.val)
        lo = min(x.v, y.v)
        hi = max(x.v + len(x.digits), y.v + len(y.digits))
        return _exact_fpt(fd, lo, [(x.digit_at(i) + y.digit_at(i)) % fd.p
                                   for i in range(lo, hi)])
    ends = [e for e in (x.end, y.end) if e is not None]
    end = min(ends)
    lo = min(x.v, y.v)
    width = end - lo
    if width <= 0:
        raise PrecisionError("windows do not overlap", known_valuation=end)
    if fd.family == "Qp":
        s = (_window_int(x, lo, width) + _window_int(y, lo, width)) % fd.p**width
        if s == 0:
            raise PrecisionError("cancellation consumed all known digits",
                                 known_valuation=end)
        w = valp(s, fd.p)
        prec = min(width - w, fd.N)
        return _trunc(fd, lo + w, _int_digits(s // fd.p**w, fd.p, prec))
    cs = [(a + b) % fd.p for a, b in zip(_window_coeffs(x, lo, width),
                                         _window_coeffs(y, lo, width))]
    lead = next((i for i, c in enumerate(cs) if c), None)
    if lead is None:
        raise PrecisionError("cancellation consumed all known digits",
                             known_valuation=end)
    return _trunc(fd, lo + lead, cs[lead: lead + min(width - lead, fd.N)])


def vf_sub(x: VFElem, y: VFElem) -> VFElem:
    return vf_add(x, vf_neg(y))


def vf_mul(x: VFElem, y: VFElem) -> VFElem:
    fd = x.fd
    assert fd == y.fd, "operands from different fields"
    if x.exact_zero or y.exact_zero:
        return vf_zero(fd)
    if x.exact and y.exact:
        if fd.family == "Qp":
            return _exact_qp(fd, x.val * y.val)
        width = len(x.digits) + len(y.digits) - 1
        out = [0] * width
        for i, a in enumerate(x.digits):
            for j, b in enumerate(y.digits):
                out[i + j] = (out[i + j] + a * b) % fd.p
        return _exact_fpt(fd, x.v + y.v, out)
    prec = min(len(x.digits) if not x.exact else fd.N,
               len(y.digits) if not y.exact else fd.N)
    v = x.v + y.v
    if fd.family == "Qp":
        u = _window_int(x, x.v, prec) * _window_int(y, y.v, prec) % fd.p**prec
        return _trunc(fd, v, _int_digits(u, fd.p, prec))
    out = [0] * prec
    xs = _window_coeffs(x, x.v, prec)
    ys = _window_coeffs(y, y.v, prec)
    for i, a in enumerate(xs):
        if a == 0:
            continue
        for j, b in enumerate(ys):
            if i + j >= prec:
                break
            out[i + j] = (out[i + j] + a * b) % fd.p
    return _trunc(fd, v, out)


def _fpt_series_inv(fd: FieldDesc, digits: Sequence[int], prec: int) -> list[int]:
    inv0 = pow(digits[0], -1, fd.p)
    out = [inv0] + [0] * (prec - 1)
    for k in range(1, prec):
        acc = 0
        for i in range(1, min(k, len(digits) - 1) + 1):
            acc += digits[i] * out[k - i]
        out[k] = (-inv0 * acc) % fd.p
    return out


def vf_inv(x: VFElem) -> VFElem:
    fd = x.fd
    if x.exact_zero:
        raise ZeroDivisionError("inversion of exact zero")
    if fd.family == "Qp":
        if x.exact:
            return _exact_qp(fd, 1 / x.val)
        prec = len(x.digits)
        u = _window_int(x, x.v, prec)
        return _trunc(fd, -x.v, _int_digits(pow(u, -1, fd.p**prec), fd.p, prec))
    if x.exact and len(x.digits) == 1:
        return _exact_fpt(fd, -x.v, [pow(x.digits[0], -1, fd.p)])
    prec = len(x.digits) if not x.exact else fd.N
    return _trunc(fd, -x.v, _fpt_series_inv(fd, x.digits, prec))


def vf_arith(fd: FieldDesc, op: str, x: VFElem, y: VFElem | None = None) -> VFElem:
    """Dispatcher form of the ring operations: op in add|mul|neg|inv|sub."""
    if op == "add":
        return vf_add(x, y)
    if op == "mul":
        return vf_mul(x, y)
    if op == "sub":
        return vf_sub(x, y)
    if op == "neg":
        return vf_neg(x)
    if op == "inv":
        return vf_inv(x)
    raise InputError(f"unknown arithmetic op {op!r}")


def vf_ord(x: VFElem) -> int:
    if x.exact_zero:
        raise OrdOfZeroError("ord is undefined on the zero element")
    return x.v


def vf_ac(x: VFElem) -> RFElem:
    """Angular component: leading expansion digit, with ac(0) = 0."""
    if x.exact_zero:
        return RFElem(0, x.fd.p)
    return RFElem(x.digits[0], x.fd.p)


def vf_equal_verdict(x: VFElem, y: VFElem) -> bool | None:
    """Three-valued equality: True/False when certain, None when the common
    precision window is exhausted without a disagreement."""
    if x.exact_zero and y.exact_zero:
        return True
    if x.exact_zero or y.exact_zero:
        return False  # the other side is normalized, hence nonzero
    if x.exact and y.exact:
        if x.fd.family == "Qp":
            return x.val == y.val
        return x.v == y.v and x.digits == y.digits
    if x.v != y.v:
        return False
    ends = [e for e in (x.end, y.end) if e is not None]
    end = min(ends)
    for i in range(x.v, end):
        if x.digit_at(i) != y.digit_at(i):
            return False
    return None


# ---------------------------------------------------------------------------
# ball enumeration
# ---------------------------------------------------------------------------

def enumerate_ball(fd: FieldDesc, vmin: int, vmax: int, depth: int) -> Iterator[VFElem]:
    """Exact zero plus one exact representative per class
    {x : ord(x) = v, x fixed mod w^(v+depth)} for v in [vmin, vmax].

    Valuations ascending, digit tuples lexicographic; (p-1)*p^(depth-1)
    representatives per valuation.
    """
    if vmin > vmax:
        raise InputError("vmin must not exceed vmax")
    if not (1 <= depth <= fd.N):
        raise InputError(f"depth must lie in [1, N={fd.N}]")
    yield vf_zero(fd)
    p = fd.p
    for v in range(vmin, vmax + 1):
        for c0 in range(1, p):
            for rest in itertools.product(range(p), repeat=depth - 1):
                digits = (c0, *rest)
                if fd.family == "Qp":
                    val = sum(Fraction(d) * Fraction(p) ** (v + i)
                              for i, d in enumerate(digits))
                    yield _exact_qp(fd, val)
                else:
                    yield _exact_fpt(fd, v, digits)


def ball_size(fd: FieldDesc, vmin: int, vmax: int, depth: int) -> int:
    return 1 + (vmax - vmin + 1) * (fd.p - 1) * fd.p ** (depth - 1)


# ---------------------------------------------------------------------------
# element literals (CLI surface)
# ---------------------------------------------------------------------------

_LIT_RE = re.compile(
    r"(?P<fam>Qp|FpT)\(\s*(?P<p>\d+)\s*(?:,\s*N\s*=\s*(?P<N>\d+)\s*)?\)"
    r"\{(?P<body>[^}]*)\}")


def parse_element_literal(text: str, default_N: int = 12,
                          fd: FieldDesc | None = None) -> VFElem:
    """Parse an element literal.

    Forms: ``Qp(5,N=12){v=-1; 2,3,0,...}`` (trailing ``...`` marks a
    truncated window), ``FpT(5){v=1; 2,0}`` (no dots: exact),
    ``Qp(5){exact=-24/7}``, and ``0!`` for the exact zero.  Digits outside
    [0, p) are tolerated and normalized (carried in Q_p, reduced mod p in
    F_p((t))).
    """
    text = text.strip()
    if text == "0!":
        if fd is None:
            raise InputError("bare '0!' needs a field context")
        return vf_zero(fd)
    m = _LIT_RE.fullmatch(text)
    if not m:
        raise InputError(f"malformed element literal {text!r}")
    p = int(m.group("p"))
    N = int(m.group("N")) if m.group("N") else (fd.N if fd else default_N)
    want = FieldDesc(m.group("fam"), p, N)
    if fd is not None and (fd.family != want.family or fd.p != want.p):
        raise InputError(f"literal field {want} does not match context field {fd}")
    body = m.group("body").strip()
    if body.startswith("exact="):
        if want.family != "Qp":
            raise InputError("exact= literals are for Qp; FpT digits are already exact")
        return _exact_qp(want, Fraction(body[len("exact="):].strip()))
    bm = re.fullmatch(r"v\s*=\s*(-?\d+)\s*;\s*(.*)", body)
    if not bm:
        raise InputError(f"malformed element literal body {body!r}")
    v = int(bm.group(1))
    digit_src = bm.group(2).strip()
    truncated = digit_src.endswith("...")
    if truncated:
        digit_src = digit_src[:-3].rstrip().rstrip(",")
    try:
        digits = [int(s.strip()) for s in digit_src.split(",") if s.strip()]
    except ValueError:
        raise InputError(f"bad digit list in element literal {text!r}")
    if not digits:
        raise InputError("element literal has no digits")
    if truncated:
        return make_truncated(want, v, digits)
    if want.family == "Qp":
        val = sum(Fraction(d) * Fraction(p) ** (v + i) for i, d in enumerate(digits))
        return _exact_qp(want, val)
    return _exact_fpt(want, v, digits)
