"""Finite sums of terms  c * prod(linear forms) * q^(linear form)  on Z^r,
with exact evaluation and dominant-term bound analysis.

For one variable the bound routine returns a certified minimal pair (a, b)
with |h(q, x)| <= q^(a + b|x|) for all integers q >= q0 on the domain.  The
domain is decomposed into sign-pure progressions and points; on each
progression the terms become c * P(k) * q^(alpha + beta k) along
x = base +- step*k, and the analysis splits into

  * an exact head: for each small k the value h(q, x(k)) is a Laurent
    polynomial in q, and the least M with |h| <= q^M for all q >= q0 is
    computed exactly (integer root bounds decide positivity);
  * a certified tail: once b*step strictly exceeds the top slope beta*,
    each term is dominated via |P(k)| <= C (k+1)^deg and (k+1)^deg <=
    q^(g k) induction; in the equality case b*step = beta* the top-slope
    terms must be constant multiples of q-powers and the remainder is
    absorbed into the margin q^A - |g*(q)| >= q^(M*) (q - 1).

Minimality is certificate-backed: the head argmax yields an explicit
violation of (a-1, b), and lowering b puts the dominant slope above the
bound, with a concrete violating point recorded when one exists in the
scan window.  For r > 1 only a window-verified, non-certified candidate
is produced.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import syntax as sx
from .errors import DomainError, FormulaSyntaxError, InputError, ResourceError
from .presburger import (Conjunct, PresburgerSet, Progression1D, normalize_1d,
                         presburger_qe)

BRUTE_QS = (2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13)
HEAD_CAP = 4096


@dataclass(frozen=True)
class LinForm:
    """const + sum(coeffs[i] * x_i), exact integer arithmetic."""

    const: int
    coeffs: tuple[int, ...]

    def __call__(self, point: tuple[int, ...]) -> int:
        return self.const + sum(c * x for c, x in zip(self.coeffs, point))

    def render(self, names: tuple[str, ...]) -> str:
        parts = []
        for c, n in zip(self.coeffs, names):
            if c == 0:
                continue
            if c == 1:
                parts.append(n)
            elif c == -1:
                parts.append(f"-{n}")
            else:
                parts.append(f"{c}{n}")
        if self.const or not parts:
            parts.append(str(self.const))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


@dataclass(frozen=True)
class TsTerm:
    coef: Fraction
    factors: tuple[LinForm, ...]
    expo: LinForm


@dataclass(frozen=True)
class TermSum:
    varnames: tuple[str, ...]
    terms: tuple[TsTerm, ...]
    domain: PresburgerSet

    @property
    def r(self) -> int:
        return len(self.varnames)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            bits = [] if t.coef == 1 and t.factors else [str(t.coef)]
            bits += [f"({f.render(self.varnames)})" for f in t.factors]
            bits.append(f"q^({t.expo.render(self.varnames)})")
            parts.append("*".join(bits))
        return " + ".join(parts)


def tsum_eval(h: TermSum, q: int, point: tuple[int, ...] | int) -> Fraction:
    """Exact value at an integer q >= 2 and a domain point."""
    if isinstance(point, int):
        point = (point,)
    if q < 2:
        raise InputError("q must be at least 2")
    if not h.domain.contains(point):
        raise DomainError(f"{point} lies outside the declared domain")
    total = Fraction(0)
    for t in h.terms:
        val = t.coef * Fraction(q) ** t.expo(point)
        for f in t.factors:
            val *= f(point)
        total += val
    return total


def tsum_merge(h: TermSum) -> TermSum:
    """Combine terms with identical factor multiset and exponent; canonical order."""
    grouped: dict[tuple, Fraction] = {}
    for t in h.terms:
        key = (tuple(sorted((f.const, f.coeffs) for f in t.factors)),
               (t.expo.const, t.expo.coeffs))
        grouped[key] = grouped.get(key, Fraction(0)) + t.coef
    terms = []
    for (facs, expo), coef in grouped.items():
        if coef == 0:
            continue
        terms.append(TsTerm(coef,
                            tuple(LinForm(c, cf) for c, cf in facs),
                            LinForm(expo[0], expo[1])))
    terms.sort(key=lambda t: ((t.expo.coeffs, t.expo.const),
                              tuple((f.coeffs, f.const) for f in t.factors),
                              t.coef))
    return TermSum(h.varnames, tuple(terms), h.domain)


# ---------------------------------------------------------------------------
# exact Laurent-polynomial bounds in q
# ---------------------------------------------------------------------------

def _laurent_nonneg(coeffs: dict[int, Fraction], q0: int) -> int | None:
    """None if sum c_e q^e >= 0 for every integer q >= q0, else a violating q."""
    if not coeffs:
        return None
    lo = min(coeffs)
    den = 1
    for c in coeffs.values():
        den = den * c.denominator // __import__("math").gcd(den, c.denominator)
    poly: dict[int, int] = {e - lo: int(c * den) for e, c in coeffs.items() if c != 0}
    if not poly:
        return None
    deg = max(poly)
    lead = poly[deg]
    if lead < 0:
        # negative for large q; find a concrete witness
        q = q0
        while True:
            if sum(c * q**e for e, c in poly.items()) < 0:
                return q
            q += 1
            if q > q0 + 10_000:
                raise ResourceError("runaway search for a Laurent violation")
    cauchy = 1 + max(abs(c) for c in poly.values()) // abs(lead) + 1
    for q in range(q0, cauchy + 1):
        if sum(c * q**e for e, c in poly.items()) < 0:
            return q
    return None


def _laurent_min_power(coeffs: dict[int, Fraction], q0: int) -> tuple[int, int]:
    """(M, qwit): least M with |h(q)| <= q^M for all integers q >= q0, and a
    witness q at which M-1 fails.  h must not be identically zero."""
    coeffs = {e: c for e, c in coeffs.items() if c != 0}
    assert coeffs, "zero Laurent polynomial has no minimal power"
    total = sum(abs(c) for c in coeffs.values())
    e = 0
    while Fraction(q0) ** e < total:
        e += 1
    m = max(coeffs) + e

    def ok(M: int) -> int | None:
        # |h| <= q^M  <=>  q^M - h >= 0 and q^M + h >= 0
        for sign in (1, -1):
            d = {e_: sign * c for e_, c in coeffs.items()}
            d[M] = d.get(M, Fraction(0)) + 1
            w = _laurent_nonneg(d, q0)
            if w is not None:
                return w
        return None

    assert ok(m) is None
    wit = None
    while True:
        w = ok(m - 1)
        if w is not None:
            wit = w
            break
        m -= 1
    return m, wit


# ---------------------------------------------------------------------------
# progression-wise certified analysis (r = 1)
# ---------------------------------------------------------------------------

def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_ratio_threshold(m: int) -> int:
    """Least k0 with (k+2)^m <= 2 (k+1)^m for all k >= k0."""
    k = 0
    while (k + 2) ** m > 2 * (k + 1) ** m:
        k += 1
    return k


@dataclass
class _ProgTerm:
    coef: Fraction           # term coefficient
    poly: list[int]          # prod of factors along the progression, in k
    alpha: int               # exponent at k = 0
    beta: int                # exponent slope per k

    @property
    def deg(self) -> int:
        d = len(self.poly) - 1
        while d > 0 and self.poly[d] == 0:
            d -= 1
        return d

    @property
    def cbound(self) -> Fraction:
        return abs(self.coef) * sum(abs(c) for c in self.poly)


def _terms_on_progression(h: TermSum, base: int, step: int, sigma: int) -> list[_ProgTerm]:
    """Specialize every term to x = base + sigma*step*k."""
    out = []
    for t in h.terms:
        e1 = t.expo.coeffs[0]
        alpha = t.expo.const + e1 * base
        beta = e1 * sigma * step
        poly = [1]
        for f in t.factors:
            f1 = f.coeffs[0]
            poly = _poly_mul(poly, [f.const + f1 * base, f1 * sigma * step])
        if all(c == 0 for c in poly):
            continue
        out.append(_ProgTerm(t.coef, poly, alpha, beta))
    return out


def _h_laurent_at(h: TermSum, x: int) -> dict[int, Fraction]:
    d: dict[int, Fraction] = {}
    for t in h.terms:
        c = t.coef
        for f in t.factors:
            c *= f((x,))
        if c == 0:
            continue
        e = t.expo((x,))
        d[e] = d.get(e, Fraction(0)) + c
    return {e: c for e, c in d.items() if c != 0}


def _tail_start(terms: list[_ProgTerm], b: int, step: int, base_abs: int,
                a: int, q0: int) -> int | None:
    """First k from which the per-term domination certifies the tail, for the
    strict case b*step > beta*.  None when some term cannot be dominated."""
    A = a + b * base_abs
    T = len(terms)
    k0 = 0
    for t in terms:
        g = b * step - t.beta
        if g <= 0:
            return None
        k0 = max(k0, _poly_ratio_threshold(t.deg))
        if t.alpha > A:
            k0 = max(k0, -((A - t.alpha) // g))  # ceil((alpha-A)/g)
    k = k0
    while k < HEAD_CAP:
        if all(T * t.cbound * (k + 1) ** t.deg
               <= Fraction(q0) ** (A - t.alpha + (b * step - t.beta) * k)
               for t in terms):
            return k
        k += 1
    raise ResourceError("tail certification cap exceeded")


def _laurent_value(coeffs: dict[int, Fraction], q: int) -> Fraction:
    return sum((c * Fraction(q) ** e for e, c in coeffs.items()), Fraction(0))


def _poly_root_bound(poly: list[int]) -> int:
    """Integer beyond which the polynomial keeps the sign of its lead."""
    d = len(poly) - 1
    while d > 0 and poly[d] == 0:
        d -= 1
    if d == 0:
        return 0
    return 1 + max(abs(c) for c in poly[:d]) // abs(poly[d]) + 1


def _rest_bound(rest: list[_ProgTerm], beta_star: int, q: int, k: int) -> Fraction:
    """Upper bound for |rest(q, k)| / q^(beta* k), decreasing in k and in q
    beyond the per-term thresholds."""
    s = Fraction(0)
    for t in rest:
        s += t.cbound * (k + 1) ** t.deg * Fraction(q) ** (t.alpha + (t.beta - beta_star) * k)
    return s


def _rest_exact_sign_ok(rest: list[_ProgTerm], want: int, k: int, q: int,
                        beta_star: int) -> bool:
    val = Fraction(0)
    for t in rest:
        val += t.coef * sum(c * k**i for i, c in enumerate(t.poly)) \
            * Fraction(q) ** (t.alpha + (t.beta - beta_star) * k)
    return val == 0 or (val > 0) == (want > 0)


def _g0_tail_start(gstar: dict[int, Fraction], rest: list[_ProgTerm],
                   beta_star: int, A: int, q0: int) -> int | None:
    """Tail start for the equality case b*step == beta*.

    For q beyond a computed threshold the margin q^A - |g*(q)| is at least 1
    and dominates the remainder; each smaller q is certified individually,
    with a sign argument when the margin at that q is exactly zero."""
    if not rest:
        return 0
    rthr = max(_poly_ratio_threshold(t.deg) for t in rest)
    rthr = max(rthr, max((t.alpha + 1 for t in rest), default=0), 0)

    def margin_ge1_from(q1: int) -> bool:
        # q^A - |g*(q)| >= 1 for every integer q >= q1, both signs of g*
        for sign in (1, -1):
            d = {e: -sign * c for e, c in gstar.items()}
            d[A] = d.get(A, Fraction(0)) + 1
            d[0] = d.get(0, Fraction(0)) - 1
            if _laurent_nonneg(d, q1) is not None:
                return False
        return True

    qbig = None
    for cand in range(q0, q0 + 64):
        if margin_ge1_from(cand):
            qbig = cand
            break
    if qbig is None:
        return None

    starts = []
    # global branch: q >= qbig has margin >= 1; push the remainder under 1
    k = rthr
    while k < HEAD_CAP:
        if _rest_bound(rest, beta_star, qbig, k) <= 1:
            starts.append(k)
            break
        k += 1
    else:
        raise ResourceError("tail certification cap exceeded")

    # per-q branch for the finitely many critical q below the threshold
    for qh in range(q0, qbig):
        gq = _laurent_value(gstar, qh)
        gap = Fraction(qh) ** A - abs(gq)
        if gap < 0:
            return None  # a is too small here; the caller bumps it
        if gap > 0:
            k = rthr
            while k < HEAD_CAP:
                if _rest_bound(rest, beta_star, qh, k) <= gap:
                    starts.append(k)
                    break
                k += 1
            else:
                raise ResourceError("tail certification cap exceeded")
            continue
        # |g*(qh)| equals qh^A exactly: the remainder must pull toward zero
        if gq == 0:
            return None
        want = -1 if gq > 0 else 1
        signs = set()
        for t in rest:
            lead = next((t.poly[d] for d in range(len(t.poly) - 1, -1, -1)
                         if t.poly[d] != 0), 0)
            signs.add(1 if t.coef * lead > 0 else -1)
        if signs != {want}:
            return None
        kroots = max(_poly_root_bound(t.poly) for t in rest)
        k = max(rthr, kroots)
        while k < HEAD_CAP:
            if _rest_bound(rest, beta_star, qh, k) <= 2 * abs(gq) and \
                    _rest_exact_sign_ok(rest, want, k, qh, beta_star):
                starts.append(k)
                break
            k += 1
        else:
            raise ResourceError("tail certification cap exceeded")
    return max(starts)


@dataclass
class _Component:
    kind: str            # "prog" | "point"
    base: int
    step: int = 0
    sigma: int = 1

    def x_of(self, k: int) -> int:
        return self.base + self.sigma * self.step * k

    def label(self) -> str:
        if self.kind == "point":
            return f"x = {self.base}"
        return f"x = {self.base} {'+' if self.sigma > 0 else '-'} {self.step}k"


def _sign_pure_components(entries: list[Progression1D]) -> list[_Component]:
    comps: list[_Component] = []
    for e in entries:
        if e.direction == "point":
            comps.append(_Component("point", e.base))
        elif e.direction == "+":
            x = e.base
            while x < 0:
                comps.append(_Component("point", x))
                x += e.step
            comps.append(_Component("prog", x, e.step, +1))
        else:
            x = e.base
            while x > 0:
                comps.append(_Component("point", x))
                x -= e.step
            comps.append(_Component("prog", x, e.step, -1))
    return comps


@dataclass
class BoundCertificate:
    a: int
    b: int
    certified: bool
    q0: int
    components: list[dict] = field(default_factory=list)
    a_witness: tuple[int, int] | None = None   # (q, x) violating (a-1, b)
    b_argument: str = ""
    b_witness: tuple[int, int] | None = None   # (q, x) violating (a, b-1)
    dominance_thresholds: list[dict] = field(default_factory=list)
    notes: str = ""


def _component_min_b(terms: list[_ProgTerm], step: int) -> tuple[int, int]:
    """(b0, beta*) with b0 the least integer satisfying b0*step >= beta*."""
    beta_star = max(t.beta for t in terms)
    b0 = -((-beta_star) // step)
    return b0, beta_star


def _certify_component(h: TermSum, comp: _Component, b: int, q0: int) -> dict | None:
    """Minimal a on one component for the given b, with certificate data.
    None when b is too small for this component."""
    if comp.kind == "point":
        lau = _h_laurent_at(h, comp.base)
        if not lau:
            return {"component": comp.label(), "a_req": None}
        m, qwit = _laurent_min_power(lau, q0)
        return {"component": comp.label(), "a_req": m - 0,
                "head_max_x": comp.base, "head_witness_q": qwit,
                "kind": "point", "b_free": True,
                "a_of_b": lambda bb: m - abs(comp.base) * bb}
    terms = _terms_on_progression(h, comp.base, comp.step, comp.sigma)
    if not terms:
        return {"component": comp.label(), "a_req": None}
    base_abs = abs(comp.base)
    beta_star = max(t.beta for t in terms)
    G = b * comp.step - beta_star
    if G < 0:
        return None
    top = [t for t in terms if t.beta == beta_star]
    rest = [t for t in terms if t.beta < beta_star]
    if G == 0 and any(t.deg > 0 for t in top):
        return None
    gstar = {}
    mstar0 = None
    if G == 0:
        for t in top:
            c = t.coef * t.poly[0]
            gstar[t.alpha] = gstar.get(t.alpha, Fraction(0)) + c
        gstar = {e: c for e, c in gstar.items() if c != 0}
        if not gstar and not rest:
            return {"component": comp.label(), "a_req": None}
        if gstar:
            mstar0, _ = _laurent_min_power(gstar, q0)

    # interleaved head scan: a grows to the exact per-point requirement until
    # the tail certificate covers everything beyond the scanned prefix
    a_cur = None
    head_argmax = None
    head_wit_q = None
    bumps = 0
    k = 0
    while k < HEAD_CAP:
        x = comp.x_of(k)
        lau = _h_laurent_at(h, x)
        if lau:
            m, qwit = _laurent_min_power(lau, q0)
            need = m - b * abs(x)
            if a_cur is None or need > a_cur:
                a_cur = need
                head_argmax = x
                head_wit_q = qwit
        if a_cur is not None:
            if G >= 1:
                start = _tail_start(terms, b, comp.step, base_abs, a_cur, q0)
            elif gstar:
                # the k -> infinity limit alone already requires q^(M*)
                floor_a = mstar0 - b * base_abs
                if floor_a > a_cur:
                    a_cur, head_argmax, head_wit_q = floor_a, None, None
                    continue
                start = _g0_tail_start(gstar, rest, beta_star,
                                       a_cur + b * base_abs, q0)
                if start is None:
                    bumps += 1
                    if bumps > 8:
                        raise ResourceError("equality-slope certification stalled")
                    a_cur, head_argmax, head_wit_q = a_cur + 1, None, None
                    continue
            else:
                # the top group cancels identically; bound the remainder,
                # which sits at strictly smaller slope
                start = _tail_start(rest, b, comp.step, base_abs, a_cur, q0) \
                    if all(b * comp.step - t.beta >= 1 for t in rest) else None
                if start is None:
                    k += 1
                    continue
            if start is not None and start <= k + 1:
                return {"component": comp.label(), "a_req": a_cur,
                        "head_max_x": head_argmax, "head_witness_q": head_wit_q,
                        "kind": "prog", "beta_star": beta_star,
                        "tail_start": start, "head_checked": k + 1}
        k += 1
    raise ResourceError("head scan cap exceeded while certifying a component")


def tsum_bound(h: TermSum, q0: int = 2, bcap_extra: int = 4,
               window: int = 32) -> BoundCertificate | None:
    """Minimal (a, b) with |h(q, x)| <= q^(a + b|x|) on the domain, q >= q0.

    Certified for r = 1; for r > 1 a window-verified candidate is returned
    with ``certified=False``.  Returns None when no b up to the cap works.
    """
    h = tsum_merge(h)
    if not h.terms:
        return BoundCertificate(0, 0, True, q0, notes="zero after merging")
    if h.r != 1:
        return _window_bound(h, q0, window)

    entries = normalize_1d(h.domain)
    if not entries:
        return BoundCertificate(0, 0, True, q0, notes="empty domain")
    comps = _sign_pure_components(entries)

    max_slope = max(abs(t.expo.coeffs[0]) for t in h.terms)
    total_deg = max(len(t.factors) for t in h.terms)
    bcap = max_slope + total_deg + bcap_extra

    # least feasible b across progression components
    b_needed = []
    for comp in comps:
        if comp.kind != "prog":
            continue
        terms = _terms_on_progression(h, comp.base, comp.step, comp.sigma)
        if not terms:
            continue
        b0, beta_star = _component_min_b(terms, comp.step)
        b_needed.append((comp, b0, beta_star))
    b = max((b0 for _, b0, _ in b_needed), default=0)

    while b <= bcap:
        records = []
        ok = True
        for comp in comps:
            rec = _certify_component(h, comp, b, q0)
            if rec is None:
                ok = False
                break
            records.append(rec)
        if ok:
            cert = _finish_certificate(h, comps, records, b, q0, b_needed)
            return cert
        b += 1
    return None


def _scan_violation(h: TermSum, a: int, b: int, q0: int) -> tuple[int, int] | None:
    for ax in range(0, 400):
        for x in ([0] if ax == 0 else [ax, -ax]):
            if not h.domain.contains((x,)):
                continue
            for q in range(q0, q0 + 12):
                if abs(tsum_eval(h, q, (x,))) > Fraction(q) ** (a + b * abs(x)):
                    return (q, x)
    return None


def _finish_certificate(h, comps, records, b, q0, b_needed) -> BoundCertificate:
    a = 0
    a_rec = None
    constrained = [r for r in records if r.get("a_req") is not None]
    if constrained:
        for r in constrained:
            # points re-evaluate their requirement at the global b
            req = r["a_of_b"](b) if r.get("b_free") else r["a_req"]
            r["a_req_at_b"] = req
        a_rec = max(constrained, key=lambda r: r["a_req_at_b"])
        a = a_rec["a_req_at_b"]
    cert = BoundCertificate(a, b, True, q0)
    for r in records:
        cert.components.append({k: v for k, v in r.items() if not callable(v)})
    if a_rec is not None:
        if a_rec.get("head_witness_q") is not None and a_rec.get("head_max_x") is not None:
            cert.a_witness = (a_rec["head_witness_q"], a_rec["head_max_x"])
        else:
            # the binding constraint was a limit; look for a concrete witness
            cert.a_witness = _scan_violation(h, a - 1, b, q0)
    # why b-1 fails: the steepest component, plus a concrete violation if
    # one lies in the scan window
    if b_needed:
        comp, b0, beta_star = max(b_needed, key=lambda t: t[1])
        cert.b_argument = (
            f"on {comp.label()} the dominant exponent slope is {beta_star} per step "
            f"of size {comp.step}; with b = {b - 1} the bound grows at slope "
            f"{(b - 1) * comp.step}, so the dominant term eventually exceeds it")
        for k in range(0, 200):
            x = comp.x_of(k)
            if not h.domain.contains((x,)):
                continue
            val = abs(tsum_eval(h, q0, (x,)))
            if val > Fraction(q0) ** (cert.a + (b - 1) * abs(x)):
                cert.b_witness = (q0, x)
                break
    else:
        cert.b_argument = "domain is finite; b = 0 is the canonical choice"
    cert.dominance_thresholds = _dominance_table(h, comps, q0)
    return cert


def _dominance_table(h: TermSum, comps: list[_Component], q0: int) -> list[dict]:
    """Thresholds past which a positive-slope term beats a zero-slope term."""
    out = []
    for comp in comps:
        if comp.kind != "prog":
            continue
        terms = _terms_on_progression(h, comp.base, comp.step, comp.sigma)
        pos = [t for t in terms if t.beta > 0]
        flat = [t for t in terms if t.beta == 0]
        for tp in pos:
            for tf in flat:
                k = max(_poly_ratio_threshold(tp.deg + tf.deg), 1)
                while k < HEAD_CAP:
                    lhs = abs(tp.coef) * abs(sum(c * k**i for i, c in enumerate(tp.poly))) \
                        * Fraction(q0) ** (tp.alpha + tp.beta * k)
                    rhs = tf.cbound * (k + 1) ** tf.deg * Fraction(q0) ** tf.alpha
                    if lhs >= rhs and sum(c * k**i for i, c in enumerate(tp.poly)) != 0:
                        out.append({"component": comp.label(),
                                    "rising_slope": tp.beta,
                                    "flat_alpha": tf.alpha,
                                    "threshold_k": k})
                        break
                    k += 1
    return out


def _window_bound(h: TermSum, q0: int, window: int) -> BoundCertificate | None:
    """Window-verified candidate for r > 1; not certified."""
    windows = [window // 4, window // 2, window]
    best = None
    for b in range(-8, 12):
        stable = []
        for w in windows:
            amax = None
            for point in itertools.product(range(-w, w + 1), repeat=h.r):
                if not h.domain.contains(point):
                    continue
                val = abs(tsum_eval(h, q0, point))
                if val == 0:
                    continue
                norm = sum(abs(x) for x in point)
                m = 0
                while Fraction(q0) ** (m + b * norm) < val:
                    m += 1
                while Fraction(q0) ** (m - 1 + b * norm) >= val:
                    m -= 1
                amax = m if amax is None else max(amax, m)
            stable.append(amax if amax is not None else 0)
        if stable[-1] == stable[-2]:
            best = BoundCertificate(stable[-1], b, False, q0,
                                    notes=f"window-verified on |x|_inf <= {window}; "
                                          "not a certificate")
            break
    return best


def tsum_violations(h: TermSum, a: int, b: int, qs=BRUTE_QS,
                    lam_lo: int = -60, lam_hi: int = 60) -> list[tuple[int, tuple[int, ...]]]:
    """Brute-force check of |h| <= q^(a + b||x||) over a window; [] if clean."""
    out = []
    for point in itertools.product(*[range(lam_lo, lam_hi + 1)] * h.r):
        if not h.domain.contains(point):
            continue
        norm = sum(abs(x) for x in point)
        for q in qs:
            if abs(tsum_eval(h, q, point)) > Fraction(q) ** (a + b * norm):
                out.append((q, point))
    return out


# ---------------------------------------------------------------------------
# text format:  tsum name := 3*(L+1)*(2L-1)*q^(L-2) - q^(3L+1) on {L >= 0}
# ---------------------------------------------------------------------------

_TS_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
                       r"|(?P<op>[-+*/^(){}]))")


def _ts_tokens(text: str) -> list[tuple[str, str]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TS_TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise FormulaSyntaxError(f"bad term-sum syntax near {text[pos:pos+15]!r}")
            break
        pos = m.end()
        for kind in ("int", "name", "op"):
            if m.group(kind):
                toks.append((kind, m.group(kind)))
                break
    toks.append(("eof", ""))
    return toks


class _TsParser:
    def __init__(self, toks, varnames: list[str]):
        self.toks = toks
        self.i = 0
        self.vars = varnames

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        if t[0] != "eof":
            self.i += 1
        return t

    def var_index(self, name: str) -> int:
        if name not in self.vars:
            self.vars.append(name)
        return self.vars.index(name)

    def linexpr(self) -> tuple[int, dict[int, int]]:
        const, coeffs = 0, {}
        sign = 1
        first = True
        while True:
            kind, text = self.peek()
            if kind == "op" and text in "+-":
                self.next()
                sign = 1 if text == "+" else -1
            elif not first:
                break
            c = 1
            kind, text = self.peek()
            if kind == "int":
                self.next()
                c = int(text)
                kind2, text2 = self.peek()
                if kind2 == "op" and text2 == "*":
                    self.next()
                    kind2, text2 = self.peek()
                if kind2 == "name" and text2 != "q":
                    self.next()
                    coeffs[self.var_index(text2)] = coeffs.get(self.var_index(text2), 0) + sign * c
                else:
                    const += sign * c
            elif kind == "name" and text != "q":
                self.next()
                coeffs[self.var_index(text)] = coeffs.get(self.var_index(text), 0) + sign
            else:
                raise FormulaSyntaxError(f"bad linear expression near {text!r}")
            sign = 1
            first = False
            kind, text = self.peek()
            if not (kind == "op" and text in "+-"):
                break
        return const, coeffs

    def factor_atom(self):
        """One factor: rational, variable, parenthesized linear form, or q^..."""
        kind, text = self.peek()
        if kind == "int":
            self.next()
            num = int(text)
            kind2, text2 = self.peek()
            if kind2 == "op" and text2 == "/":
                self.next()
                kind3, text3 = self.next()
                if kind3 != "int":
                    raise FormulaSyntaxError("expected a denominator")
                return ("coef", Fraction(num, int(text3)))
            return ("coef", Fraction(num))
        if kind == "name" and text == "q":
            self.next()
            k, t = self.next()
            if (k, t) != ("op", "^"):
                raise FormulaSyntaxError("expected '^' after q")
            k, t = self.peek()
            if k == "op" and t == "(":
                self.next()
                const, coeffs = self.linexpr()
                k, t = self.next()
                if (k, t) != ("op", ")"):
                    raise FormulaSyntaxError("missing ')' in exponent")
            elif k == "op" and t == "-":
                self.next()
                k2, t2 = self.next()
                if k2 == "int":
                    const, coeffs = -int(t2), {}
                elif k2 == "name":
                    const, coeffs = 0, {self.var_index(t2): -1}
                else:
                    raise FormulaSyntaxError("bad exponent")
            elif k == "int":
                self.next()
                const, coeffs = int(t), {}
            elif k == "name":
                self.next()
                const, coeffs = 0, {self.var_index(t): 1}
            else:
                raise FormulaSyntaxError("bad exponent")
            return ("expo", (const, coeffs))
        if kind == "name":
            self.next()
            return ("lin", (0, {self.var_index(text): 1}))
        if kind == "op" and text == "(":
            self.next()
            const, coeffs = self.linexpr()
            k, t = self.next()
            if (k, t) != ("op", ")"):
                raise FormulaSyntaxError("missing ')'")
            return ("lin", (const, coeffs))
        raise FormulaSyntaxError(f"bad factor near {text!r}")

    def term(self, sign: int):
        coef = Fraction(sign)
        factors = []
        expo = (0, {})
        has_expo = False
        while True:
            kind, what = self.factor_atom()
            if kind == "coef":
                coef *= what
            elif kind == "lin":
                factors.append(what)
            else:
                c, cf = what
                e0, ef = expo
                merged = dict(ef)
                for i, v in cf.items():
                    merged[i] = merged.get(i, 0) + v
                expo = (e0 + c, merged)
                has_expo = True
            k, t = self.peek()
            if k == "op" and t == "*":
                self.next()
                continue
            break
        return coef, factors, expo, has_expo


def parse_tsum(text: str, default_domain: str | None = None) -> TermSum:
    """Parse ``[tsum name :=] expr [on {formula}]``."""
    text = text.strip()
    m = re.match(r"tsum\s+[A-Za-z_][A-Za-z_0-9]*\s*:=\s*", text)
    if m:
        text = text[m.end():]
    domain_text = default_domain
    m = re.search(r"\bon\s*\{(.*)\}\s*$", text, re.S)
    if m:
        domain_text = m.group(1)
        text = text[:m.start()]
    varnames: list[str] = []
    parser = _TsParser(_ts_tokens(text), varnames)
    raw_terms = []
    sign = 1
    while True:
        kind, t = parser.peek()
        if kind == "op" and t in "+-":
            parser.next()
            sign = 1 if t == "+" else -1
        raw_terms.append(parser.term(sign))
        sign = 1
        kind, t = parser.peek()
        if kind == "eof":
            break
        if not (kind == "op" and t in "+-"):
            raise FormulaSyntaxError(f"unexpected {t!r} in term sum")
    if domain_text is not None:
        f = sx.parse_formula(domain_text)
        for name in sx.free_vars(f):
            if name not in varnames:
                varnames.append(name)
    r = len(varnames)

    def mk_lin(pair) -> LinForm:
        const, coeffs = pair
        row = [0] * r
        for i, v in coeffs.items():
            row[i] = v
        return LinForm(const, tuple(row))

    terms = tuple(TsTerm(coef, tuple(mk_lin(f) for f in factors), mk_lin(expo))
                  for coef, factors, expo, _ in raw_terms)
    if domain_text is not None:
        dom = presburger_qe(sx.parse_formula(domain_text), varnames=tuple(varnames))
    else:
        dom = PresburgerSet(tuple(varnames), (Conjunct((), ()),))
    return TermSum(tuple(varnames), terms, dom)
