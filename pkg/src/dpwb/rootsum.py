"""Exact arithmetic in cyclotomic fields of prime-power conductor.

Character values and their finite sums live in Q(zeta) with zeta a
p^k-th root of unity.  Elements are kept as rational-coefficient
combinations of the power basis zeta^0 .. zeta^(phi(p^k)-1), reduced with
the relation zeta^((p-1)p^(k-1)) = -(1 + zeta^(p^(k-1)) + ...), so equality
and cancellation (for instance a full character sum collapsing to zero)
are exact.  Floats appear only in :meth:`to_complex` at the reporting edge.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction


def _phi(p: int, k: int) -> int:
    return (p - 1) * p ** (k - 1)


def _reduce(p: int, k: int, raw: dict[int, Fraction]) -> tuple[tuple[int, Fraction], ...]:
    """Reduce exponents mod the cyclotomic relation into the power basis."""
    order = p**k
    phi = _phi(p, k)
    step = p ** (k - 1)
    acc: dict[int, Fraction] = {}
    for e, c in raw.items():
        if c == 0:
            continue
        e %= order
        if e < phi:
            acc[e] = acc.get(e, Fraction(0)) + c
        else:
            r = e - phi  # 0 <= r < p^(k-1)
            for j in range(p - 1):
                ee = r + j * step
                acc[ee] = acc.get(ee, Fraction(0)) - c
    return tuple(sorted((e, c) for e, c in acc.items() if c != 0))


@dataclass(frozen=True)
class RootSum:
    """An exact element of Q(zeta_{p^k}) in reduced power-basis form."""

    p: int
    k: int
    coeffs: tuple[tuple[int, Fraction], ...]

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(p: int) -> "RootSum":
        return RootSum(p, 1, ())

    @staticmethod
    def from_rational(p: int, c) -> "RootSum":
        c = Fraction(c)
        return RootSum(p, 1, ((0, c),) if c else ())

    @staticmethod
    def one(p: int) -> "RootSum":
        return RootSum.from_rational(p, 1)

    @staticmethod
    def root(p: int, k: int, exponent: int) -> "RootSum":
        """e^(2 pi i exponent / p^k), with the conductor minimized."""
        exponent %= p**k
        while k > 1 and exponent % p == 0:
            exponent //= p
            k -= 1
        return RootSum(p, k, _reduce(p, k, {exponent: Fraction(1)}))

    # -- conductor alignment -------------------------------------------------

    def _promoted(self, k: int) -> "RootSum":
        if k == self.k:
            return self
        assert k > self.k
        f = self.p ** (k - self.k)
        return RootSum(self.p, k, _reduce(self.p, k, {e * f: c for e, c in self.coeffs}))

    @staticmethod
    def _align(a: "RootSum", b: "RootSum") -> tuple["RootSum", "RootSum"]:
        assert a.p == b.p, "mixing characters of different residue characteristic"
        k = max(a.k, b.k)
        return a._promoted(k), b._promoted(k)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other) -> "RootSum":
        other = self._coerce(other)
        a, b = RootSum._align(self, other)
        raw = {e: c for e, c in a.coeffs}
        for e, c in b.coeffs:
            raw[e] = raw.get(e, Fraction(0)) + c
        return RootSum(a.p, a.k, _reduce(a.p, a.k, raw))

    def __radd__(self, other) -> "RootSum":
        return self.__add__(other)

    def __neg__(self) -> "RootSum":
        return RootSum(self.p, self.k, tuple((e, -c) for e, c in self.coeffs))

    def __sub__(self, other) -> "RootSum":
        return self + (-self._coerce(other))

    def __mul__(self, other) -> "RootSum":
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return RootSum.zero(self.p)
            return RootSum(self.p, self.k, tuple((e, cc * c) for e, cc in self.coeffs))
        a, b = RootSum._align(self, other)
        raw: dict[int, Fraction] = {}
        for e1, c1 in a.coeffs:
            for e2, c2 in b.coeffs:
                e = e1 + e2
                raw[e] = raw.get(e, Fraction(0)) + c1 * c2
        return RootSum(a.p, a.k, _reduce(a.p, a.k, raw))

    def __rmul__(self, other) -> "RootSum":
        return self.__mul__(other)

    def _coerce(self, other) -> "RootSum":
        if isinstance(other, RootSum):
            return other
        if isinstance(other, (int, Fraction)):
            return RootSum.from_rational(self.p, other)
        raise TypeError(f"cannot combine RootSum with {type(other).__name__}")

    def conjugate(self) -> "RootSum":
        raw = {-e: c for e, c in self.coeffs}
        return RootSum(self.p, self.k, _reduce(self.p, self.k, raw))

    # -- predicates and rendering -------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RootSum.from_rational(self.p, other)
        if not isinstance(other, RootSum):
            return NotImplemented
        if self.p != other.p:
            return False
        a, b = RootSum._align(self, other)
        return a.coeffs == b.coeffs

    def __hash__(self) -> int:
        return hash((self.p, self.k, self.coeffs))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_rational(self) -> bool:
        return all(e == 0 for e, _ in self.coeffs)

    def as_fraction(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0][1]

    def rational_ratio(self, other: "RootSum") -> Fraction | None:
        """r with self == r * other, when such a rational exists."""
        if other.is_zero:
            return None
        a, b = RootSum._align(self, other)
        e0, c0 = b.coeffs[0]
        cand = None
        for e, c in a.coeffs:
            if e == e0:
                cand = c / c0
                break
        if cand is None:
            return None
        return cand if a == b * cand else None

    def to_complex(self) -> complex:
        z = 0j
        order = self.p**self.k
        for e, c in self.coeffs:
            z += float(c) * cmath.exp(2j * cmath.pi * e / order)
        return z

    def __abs__(self) -> float:
        return abs(self.to_complex())

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        order = self.p**self.k
        parts = [f"{c}*z{order}^{e}" if e else str(c) for e, c in self.coeffs]
        return " + ".join(parts)
