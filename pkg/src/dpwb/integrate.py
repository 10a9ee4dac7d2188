"""Integration of motivic (exponential) functions against the canonical
product measure, plus empirical integrability and boundedness probes.

Valued-field coordinates carry the Haar measure normalized so the valuation
ring has mass 1; residue-field and value-group coordinates carry counting
measure.  A depth-d cell at valuation v (representative fixed mod w^(v+d))
has mass p^-(v+d): (p-1)p^(d-1) cells per valuation then give the annulus
{ord = v} its mass p^-v (1 - 1/p), and the normalization, scaling and
translation invariants hold exactly by construction.

Sums are organized into nested-box shells (valuation range and z-window
growing together).  When the last few shell increments stand in an exactly
constant rational ratio r with |r| < 9/10 the geometric tail is resolved in
closed form and the result is exact; when the ratios are only numerically
constant (within 0.01, below 0.9) the tail is extrapolated in floats; and
otherwise the result is reported truncated.  Divergence is never certified,
only suspected, with the increment sequence attached as evidence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import syntax as sx
from .errors import BudgetError, InputError, WorkbenchError
from .localfield import FieldDesc, RFElem, enumerate_ball
from .motivic import MotivicExpFunction, MotivicFunction, eval_exp, eval_motivic
from .rootsum import RootSum
from .semantics import (Assignment, DefinableSet, SearchBox, TruthVal,
                        depends_only_on_ord, eval_formula)

TAIL_WINDOW = 5        # increments inspected for a geometric tail
TAIL_EPS = 0.01        # allowed ratio wobble in the float path
TAIL_RMAX = 0.9        # largest ratio accepted as a resolved tail
DIVERGENCE_STEPS = 5   # sustained non-decreasing increments => suspected


class IntegrabilityRefusal(WorkbenchError):
    """integrate_out refused because the integrand failed the L1 probe."""

    def __init__(self, verdict: "IntegrabilityVerdict"):
        self.verdict = verdict
        super().__init__(f"integrand not accepted as integrable: {verdict.kind}")


@dataclass(frozen=True)
class MeasureSpec:
    """Canonical product measure, optionally weighted by a motivic density."""

    density: MotivicFunction | None = None


@dataclass
class IntegralResult:
    exact_value: Fraction | RootSum
    tail: str  # "resolved-geometric" | "truncated" | "divergent-suspected"
    exact: bool
    float_value: complex | float
    cells_used: int
    increments: list
    unknown_mass: Fraction
    ratio: Fraction | float | None = None

    @property
    def value(self):
        """Exact object when the tail was resolved analytically, else float."""
        return self.exact_value if self.exact else self.float_value


@dataclass
class IntegrabilityVerdict:
    kind: str  # "LikelyIntegrable" | "LikelyDivergent" | "Inconclusive"
    partials: list[float] = field(default_factory=list)
    increments: list[float] = field(default_factory=list)
    detail: str = ""


@dataclass
class BoundednessReport:
    sup: Fraction | float
    witness: dict
    verdict: str  # "bounded" | "unbounded-suspected"
    shell_maxima: list[float] = field(default_factory=list)


# ---------------------------------------------------------------------------
# domain builders
# ---------------------------------------------------------------------------

def _conj(parts: list[sx.Formula]) -> sx.Formula:
    f = parts[0]
    for q in parts[1:]:
        f = sx.And(f, q)
    return f


def vf_ring_domain(names: str | list[str], vmin: int = 0) -> DefinableSet:
    """w^vmin O per coordinate: {x = 0 or ord(x) >= vmin}."""
    if isinstance(names, str):
        names = [names]
    parts = [sx.Or(sx.Eq(sx.Var(n), sx.IntLit(0)),
                   sx.Le(sx.IntLit(vmin), sx.Ord(sx.Var(n)))) for n in names]
    return DefinableSet.make(_conj(parts), {n: sx.Sort.VF for n in names})


def full_domain(sorts: Mapping[str, sx.Sort]) -> DefinableSet:
    """Unconstrained domain with the given coordinates."""
    parts = []
    for n, s in sorts.items():
        if s is sx.Sort.VF:
            parts.append(sx.Or(sx.Eq(sx.Var(n), sx.IntLit(0)),
                               sx.Le(sx.Ord(sx.Var(n)), sx.Ord(sx.Var(n)))))
        elif s is sx.Sort.ZZ:
            parts.append(sx.Le(sx.Var(n), sx.Var(n)))
        else:
            parts.append(sx.Eq(sx.Var(n), sx.Var(n)))
    return DefinableSet.make(_conj(parts), dict(sorts))


# ---------------------------------------------------------------------------
# cells
# ---------------------------------------------------------------------------

def _coord_cells(fd: FieldDesc, box: SearchBox, depth: int, sort: sx.Sort):
    """Per-coordinate list of (shell_index, value, mass)."""
    p = fd.p
    if sort is sx.Sort.RF:
        return [(0, RFElem(j, p), Fraction(1)) for j in range(p)]
    if sort is sx.Sort.ZZ:
        return [(abs(z), z, Fraction(1)) for z in range(box.zmin, box.zmax + 1)]
    cells = []
    it = enumerate_ball(fd, box.vmin, box.vmax, depth)
    next(it)  # the zero point carries no Haar mass
    for rep in it:
        cells.append((rep.v - box.vmin, rep, Fraction(1, p ** (rep.v + depth))))
    return cells


def _shell_count(box: SearchBox, coords) -> int:
    n = 0
    for _, s in coords:
        if s is sx.Sort.VF:
            n = max(n, box.vmax - box.vmin)
        elif s is sx.Sort.ZZ:
            n = max(n, abs(box.zmin), abs(box.zmax))
    return n


def _value_at(fd, box, f, env, twist):
    if isinstance(f, MotivicExpFunction):
        return eval_exp(fd, box, f, env, twist)
    return eval_motivic(fd, box, f, env)


def _zero_like(fd, f):
    return RootSum.zero(fd.p) if isinstance(f, MotivicExpFunction) else Fraction(0)


def _ord_only(f, name: str) -> bool:
    """Integrand depends on this coordinate through its valuation alone."""
    if isinstance(f, MotivicExpFunction):
        for t in f.terms:
            for g in (t.g, t.e):
                if g is not None and sx.var_occurs(g, name):
                    return False
            if t.fiber is not None and not depends_only_on_ord(t.fiber.formula, name):
                return False
            if t.factor is not None and not _ord_only(t.factor, name):
                return False
        return f.domain is None or depends_only_on_ord(f.domain.formula, name)
    for t in f.terms:
        for z in (t.alpha, *t.betas):
            if z.term is None or not depends_only_on_ord(z.term, name):
                return False
        if t.fiber is not None and not depends_only_on_ord(t.fiber.formula, name):
            return False
    return f.domain is None or depends_only_on_ord(f.domain.formula, name)


# ---------------------------------------------------------------------------
# the integrator
# ---------------------------------------------------------------------------

def integrate(fd: FieldDesc, f: MotivicFunction | MotivicExpFunction,
              domain: DefinableSet, box: SearchBox, depth: int | None = None,
              fixed: Assignment | None = None, measure: MeasureSpec | None = None,
              twist: int = 1, budget: int | None = 2_000_000) -> IntegralResult:
    """Shell-organized cell sum of f over the domain, with tail resolution."""
    depth = box.depth if depth is None else depth
    if not (1 <= depth <= fd.N):
        raise InputError(f"depth {depth} outside [1, N={fd.N}]")
    fixed = dict(fixed or {})
    sig = domain.signature
    coords = [(n, s) for n, s in sig.free if n not in fixed]
    if not coords:
        raise InputError("nothing to integrate over; all variables are fixed")

    nshell = _shell_count(box, coords)
    increments = [_zero_like(fd, f) for _ in range(nshell + 1)]
    unknown_mass = Fraction(0)
    cells_used = 0
    density = measure.density if measure else None

    fast = (len(coords) == 1 and coords[0][1] is sx.Sort.VF
            and depends_only_on_ord(domain.formula, coords[0][0])
            and _ord_only(f, coords[0][0])
            and (density is None or _ord_only(density, coords[0][0])))

    if fast:
        name = coords[0][0]
        per_v = (fd.p - 1) * fd.p ** (depth - 1)
        for v in range(box.vmin, box.vmax + 1):
            it = enumerate_ball(fd, v, v, 1)
            next(it)
            rep = next(it)  # ord-only data: any representative of the annulus
            env = dict(fixed)
            env[name] = rep
            cells_used += 1
            mass = Fraction(per_v, fd.p ** (v + depth))
            verdict = eval_formula(fd, box, env, domain)
            if verdict is TruthVal.UNKNOWN:
                unknown_mass += mass
                continue
            if verdict is TruthVal.FALSE:
                continue
            val = _value_at(fd, box, f, env, twist)
            if density is not None:
                val = val * _density_at(fd, box, density, env)
            increments[v - box.vmin] = increments[v - box.vmin] + val * mass
    else:
        streams = [_coord_cells(fd, box, depth, s) for _, s in coords]
        for combo in itertools.product(*streams):
            cells_used += 1
            if budget is not None and cells_used > budget:
                raise BudgetError(f"cell budget {budget} exceeded")
            shell = max(c[0] for c in combo)
            mass = Fraction(1)
            env = dict(fixed)
            for (n, _), (_, value, m) in zip(coords, combo):
                env[n] = value
                mass *= m
            verdict = eval_formula(fd, box, env, domain)
            if verdict is TruthVal.UNKNOWN:
                unknown_mass += mass
                continue
            if verdict is TruthVal.FALSE:
                continue
            val = _value_at(fd, box, f, env, twist)
            if density is not None:
                val = val * _density_at(fd, box, density, env)
            increments[shell] = increments[shell] + val * mass

    return _assemble(fd, f, increments, cells_used, unknown_mass)


def _density_at(fd, box, density, env) -> Fraction:
    d = eval_motivic(fd, box, density, env)
    if d < 0:
        raise InputError(f"measure density is negative ({d}) at {env}")
    return d


def _as_float(x) -> complex | float:
    if isinstance(x, RootSum):
        z = x.to_complex()
        return z.real if abs(z.imag) < 1e-15 else z
    return float(x)


def _is_zero(x) -> bool:
    return x.is_zero if isinstance(x, RootSum) else x == 0


def _exact_ratio(a, b):
    """b/a as an exact Fraction, if it exists (a, b exact increments)."""
    if isinstance(a, RootSum) or isinstance(b, RootSum):
        if not isinstance(a, RootSum):
            a = RootSum.from_rational(b.p, a)
        if not isinstance(b, RootSum):
            b = RootSum.from_rational(a.p, b)
        return b.rational_ratio(a)
    if a == 0:
        return None
    return b / a


def _fit_recurrence(window: list[Fraction], k: int) -> list[Fraction] | None:
    """Exact constant-coefficient recurrence of order k fitted on the first
    equations of the window and verified on all the rest."""
    if len(window) < 2 * k + 1:
        return None
    rows = [window[i:i + k][::-1] for i in range(len(window) - k)]
    rhs = window[k:]
    # solve the first k equations by elimination over Q
    m = [list(rows[i]) + [rhs[i]] for i in range(k)]
    for col in range(k):
        piv = next((r for r in range(col, k) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(k):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    coeffs = [m[i][k] for i in range(k)]
    for row, want in zip(rows[k:], rhs[k:]):
        if sum(c * x for c, x in zip(coeffs, row)) != want:
            return None
    if sum(abs(c) for c in coeffs) >= 1:
        return None  # contraction test: every mode then lies inside the disk
    return coeffs


def _recurrence_tail(window: list[Fraction], coeffs: list[Fraction]) -> Fraction:
    """Exact sum of the recurrence-generated continuation past the window."""
    k = len(coeffs)
    lead = Fraction(0)
    for j in range(1, k + 1):
        b_j = sum(window[len(window) - j:], Fraction(0))
        lead += coeffs[j - 1] * b_j
    return lead / (1 - sum(coeffs))


def _assemble(fd, f, increments, cells_used, unknown_mass) -> IntegralResult:
    partial = _zero_like(fd, f)
    for inc in increments:
        partial = partial + inc
    result = IntegralResult(
        exact_value=partial, tail="truncated", exact=False,
        float_value=_as_float(partial), cells_used=cells_used,
        increments=increments, unknown_mass=unknown_mass)

    window = increments[-TAIL_WINDOW:]
    if len(window) < TAIL_WINDOW:
        return result

    if all(_is_zero(w) for w in window):
        result.tail = "resolved-geometric"
        result.exact = True
        result.ratio = Fraction(0)
        return result

    # exact geometric tail
    ratios = []
    ok = all(not _is_zero(w) for w in window)
    if ok:
        for a, b in zip(window, window[1:]):
            r = _exact_ratio(a, b)
            if r is None:
                ok = False
                break
            ratios.append(r)
    if ok and len(set(ratios)) == 1 and abs(ratios[0]) < Fraction(9, 10):
        r = ratios[0]
        tail = window[-1] * (r / (1 - r))
        result.exact_value = partial + tail
        result.float_value = _as_float(result.exact_value)
        result.tail = "resolved-geometric"
        result.exact = True
        result.ratio = r
        return result

    # mixtures of geometric modes (e.g. sums of integrands with different
    # decay rates) satisfy a short exact linear recurrence; fit and verify
    # one on a longer window, then sum the continuation in closed form
    rat_window = []
    for w in increments[-(2 * 3 + 3):]:
        if isinstance(w, RootSum):
            if not w.is_rational:
                rat_window = None
                break
            rat_window.append(w.as_fraction())
        else:
            rat_window.append(w)
    if rat_window:
        for k in (2, 3):
            coeffs = _fit_recurrence(rat_window, k)
            if coeffs is not None:
                tail = _recurrence_tail(rat_window, coeffs)
                exact_tail = tail if not isinstance(partial, RootSum) \
                    else RootSum.from_rational(fd.p, tail)
                result.exact_value = partial + exact_tail
                result.float_value = _as_float(result.exact_value)
                result.tail = "resolved-geometric"
                result.exact = True
                result.ratio = coeffs
                return result

    mags = [abs(_as_float(w)) for w in window]
    if all(m > 0 for m in mags):
        fratios = [b / a for a, b in zip(mags, mags[1:])]
        mean = sum(fratios) / len(fratios)
        if all(r >= 1.0 - 1e-12 for r in fratios):
            result.tail = "divergent-suspected"
            return result
        if max(abs(r - mean) for r in fratios) <= TAIL_EPS and mean < TAIL_RMAX:
            # numerically geometric; extrapolate in floats
            last = _as_float(window[-1])
            result.float_value = _as_float(partial) + last * mean / (1 - mean)
            result.tail = "resolved-geometric"
            result.ratio = mean
            return result
    return result


# ---------------------------------------------------------------------------
# integrability / boundedness probes
# ---------------------------------------------------------------------------

def check_integrable(fd: FieldDesc, f, domain: DefinableSet, box: SearchBox,
                     depth: int | None = None, fixed: Assignment | None = None,
                     twist: int = 1, budget: int | None = 2_000_000,
                     eps: float = 0.05) -> IntegrabilityVerdict:
    """Probe L1 behaviour: partial integrals of |f| over nested boxes.

    Geometric decay of the shell increments reads as LikelyIntegrable,
    sustained non-decrease as LikelyDivergent, anything else Inconclusive.
    """
    depth = box.depth if depth is None else depth
    fixed = dict(fixed or {})
    sig = domain.signature
    coords = [(n, s) for n, s in sig.free if n not in fixed]
    nshell = _shell_count(box, coords)
    increments = [Fraction(0) for _ in range(nshell + 1)]
    cells = 0

    fast = (len(coords) == 1 and coords[0][1] is sx.Sort.VF
            and depends_only_on_ord(domain.formula, coords[0][0])
            and _ord_only(f, coords[0][0]))
    streams = None if fast else [_coord_cells(fd, box, depth, s) for _, s in coords]

    def add(shell, env, mass):
        val = _value_at(fd, box, f, env, twist)
        mag = abs(val) if isinstance(val, Fraction) else abs(val)
        if isinstance(mag, float):
            mag = Fraction(mag).limit_denominator(10**15)
        increments[shell] += mag * mass

    if fast:
        name = coords[0][0]
        per_v = (fd.p - 1) * fd.p ** (depth - 1)
        for v in range(box.vmin, box.vmax + 1):
            it = enumerate_ball(fd, v, v, 1)
            next(it)
            env = dict(fixed)
            env[name] = next(it)
            if eval_formula(fd, box, env, domain) is TruthVal.TRUE:
                add(v - box.vmin, env, Fraction(per_v, fd.p ** (v + depth)))
            cells += 1
    else:
        for combo in itertools.product(*streams):
            cells += 1
            if budget is not None and cells > budget:
                raise BudgetError(f"cell budget {budget} exceeded")
            env = dict(fixed)
            mass = Fraction(1)
            for (n, _), (_, value, m) in zip(coords, combo):
                env[n] = value
                mass *= m
            if eval_formula(fd, box, env, domain) is TruthVal.TRUE:
                add(max(c[0] for c in combo), env, mass)

    partials = list(itertools.accumulate(increments))
    out = IntegrabilityVerdict("Inconclusive",
                               [float(x) for x in partials],
                               [float(x) for x in increments])
    window = increments[-TAIL_WINDOW:]
    if len(window) < TAIL_WINDOW:
        out.detail = "box too small for a verdict"
        return out
    if all(w == 0 for w in window):
        out.kind = "LikelyIntegrable"
        out.detail = "increments vanish at the box edge"
        return out
    if all(w > 0 for w in window):
        ratios = [b / a for a, b in zip(window, window[1:])]
        if all(r < 1 - eps for r in ratios):
            out.kind = "LikelyIntegrable"
            out.detail = f"geometric decay, ratios ~ {float(ratios[-1]):.4g}"
            return out
        if all(r >= 1 for r in ratios):
            out.kind = "LikelyDivergent"
            out.detail = f"non-decreasing increments over {DIVERGENCE_STEPS} shells"
            return out
    out.detail = "no stable pattern in the increment sequence"
    return out


def check_bounded(fd: FieldDesc, f, domain: DefinableSet, box: SearchBox,
                  depth: int | None = None, fixed: Assignment | None = None,
                  twist: int = 1, budget: int | None = 2_000_000) -> BoundednessReport:
    """Exact max of |f| over enumerated cells with the arg-max cell; flags
    unbounded-suspected growth of the per-shell maxima at the box edge."""
    depth = box.depth if depth is None else depth
    fixed = dict(fixed or {})
    sig = domain.signature
    coords = [(n, s) for n, s in sig.free if n not in fixed]
    nshell = _shell_count(box, coords)
    shell_max: list = [None] * (nshell + 1)
    best = None
    witness: dict = {}
    cells = 0
    streams = [_coord_cells(fd, box, depth, s) for _, s in coords]
    for combo in itertools.product(*streams):
        cells += 1
        if budget is not None and cells > budget:
            raise BudgetError(f"cell budget {budget} exceeded")
        env = dict(fixed)
        for (n, _), (_, value, _m) in zip(coords, combo):
            env[n] = value
        if eval_formula(fd, box, env, domain) is not TruthVal.TRUE:
            continue
        val = _value_at(fd, box, f, env, twist)
        mag = abs(val)
        shell = max(c[0] for c in combo)
        if shell_max[shell] is None or mag > shell_max[shell]:
            shell_max[shell] = mag
        if best is None or mag > best:
            best = mag
            witness = {n: env[n] for n, _ in coords}
    maxima = [float(m) for m in shell_max if m is not None]
    verdict = "bounded"
    if len(maxima) > DIVERGENCE_STEPS:
        tailm = maxima[-DIVERGENCE_STEPS:]
        if all(b > a for a, b in zip(tailm, tailm[1:])):
            verdict = "unbounded-suspected"
    return BoundednessReport(best if best is not None else Fraction(0),
                             witness, verdict, maxima)


def integrate_out(fd: FieldDesc, f, x: Assignment, domain: DefinableSet,
                  box: SearchBox, depth: int | None = None, twist: int = 1,
                  budget: int | None = 2_000_000) -> IntegralResult:
    """Integrate the unfixed coordinates out at a fixed base point.

    The integrand must first pass the integrability probe; otherwise the
    call refuses with the verdict attached.
    """
    verdict = check_integrable(fd, f, domain, box, depth, fixed=x,
                               twist=twist, budget=budget)
    if verdict.kind != "LikelyIntegrable":
        raise IntegrabilityRefusal(verdict)
    return integrate(fd, f, domain, box, depth, fixed=x, twist=twist, budget=budget)
