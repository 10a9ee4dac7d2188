"""Measure normalization, closed-form integrals, probes, and closure under
integrating a variable out."""

from fractions import Fraction

import pytest

from dpwb.errors import InputError
from dpwb.integrate import (IntegrabilityRefusal, MeasureSpec, check_bounded,
                            check_integrable, integrate, integrate_out,
                            vf_ring_domain)
from dpwb.localfield import FieldDesc, embed_constant, qp_from_fraction
from dpwb.motivic import (ExpTerm, MotivicExpFunction, MotivicFunction, MotivicTerm,
                          ZFunction)
from dpwb.semantics import DefinableSet, SearchBox
from dpwb.syntax import Sort, parse_term

BOX = SearchBox(vmin=0, vmax=8, depth=2, zmin=0, zmax=8)
ONE = MotivicFunction((MotivicTerm(alpha=ZFunction.const(0)),))
QINV = MotivicFunction((MotivicTerm(alpha=ZFunction.from_text("0 - ord(x)")),))
QPLUS = MotivicFunction((MotivicTerm(alpha=ZFunction.from_text("ord(x)")),))
O_X = vf_ring_domain("x")


@pytest.mark.parametrize("family", ["Qp", "FpT"])
@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
@pytest.mark.parametrize("depth", [1, 2, 3])
def test_normalization(family, p, depth):
    fd = FieldDesc(family, p)
    r = integrate(fd, ONE, O_X, BOX, depth=depth)
    assert r.exact and r.exact_value == 1


@pytest.mark.parametrize("family", ["Qp", "FpT"])
@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_geometric_closed_form(family, p):
    # sum over v of p^-v * p^-v(1 - 1/p) = p/(p+1), resolved exactly
    fd = FieldDesc(family, p)
    r = integrate(fd, QINV, O_X, BOX)
    assert r.exact and r.tail == "resolved-geometric"
    assert r.exact_value == Fraction(p, p + 1)
    assert r.ratio == Fraction(1, p * p)


def test_scaling():
    fd = FieldDesc("Qp", 5)
    r = integrate(fd, ONE, vf_ring_domain("x", vmin=1), BOX)
    assert r.exact and r.exact_value == Fraction(1, 5)
    r2 = integrate(fd, ONE, vf_ring_domain("x", vmin=-2),
                   SearchBox(-2, 8, 2, 0, 0))
    assert r2.exact and r2.exact_value == 25


@pytest.mark.parametrize("family", ["Qp", "FpT"])
def test_translation_invariance(family):
    # mass of a + O equals mass of O for ord(a) >= -3, at cell-aligned depth
    fd = FieldDesc(family, 5)
    dom = DefinableSet.make("x - a = 0 \\/ 0 <= ord(x - a)",
                            {"x": Sort.VF, "a": Sort.VF})
    box = SearchBox(-3, 8, 3, 0, 0)
    from dpwb.localfield import fpt_from_coeffs
    if family == "Qp":
        shifts = [qp_from_fraction(fd, Fraction(1, 125)),
                  qp_from_fraction(fd, Fraction(7, 25)),
                  embed_constant(fd, 3)]
    else:
        shifts = [fpt_from_coeffs(fd, -3, [1]), fpt_from_coeffs(fd, -2, [2, 3]),
                  embed_constant(fd, 3)]
    for a in shifts:
        r = integrate(fd, ONE, dom, box, depth=3, fixed={"a": a})
        assert r.exact and r.exact_value == 1, (a.to_literal(), r.exact_value)
        assert r.unknown_mass == 0


def test_linearity_on_resolved_inputs():
    fd = FieldDesc("Qp", 5)
    combined = MotivicFunction(QINV.terms + ONE.terms)
    ra = integrate(fd, QINV, O_X, BOX)
    rb = integrate(fd, ONE, O_X, BOX)
    rc = integrate(fd, combined, O_X, BOX)
    assert rc.exact and rc.exact_value == ra.exact_value + rb.exact_value


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_depth_refinement_consistency(depth):
    # the integrand is locally constant of level 1, so any depth agrees
    fd = FieldDesc("FpT", 7)
    assert integrate(fd, QINV, O_X, BOX, depth=depth).exact_value == Fraction(7, 8)


def test_character_integral_vanishes():
    # integral over O of Lambda(w^-2 x): zero exactly once cells resolve the
    # conductor, i.e. at depth 3
    f = MotivicExpFunction((ExpTerm(g=parse_term("x"), g_shift=-2),))
    for family in ("Qp", "FpT"):
        fd = FieldDesc(family, 5)
        r = integrate(fd, f, O_X, BOX, depth=3)
        assert r.exact and r.exact_value.is_zero
        r4 = integrate(fd, f, O_X, BOX, depth=4)
        assert r4.exact_value.is_zero


def test_zz_coordinate_with_geometric_tail():
    # sum over z >= 0 of p^-2z = 1/(1 - p^-2), counting measure
    fd = FieldDesc("Qp", 5)
    f = MotivicFunction((MotivicTerm(
        alpha=ZFunction.from_text("0 - (z + z)")),))
    dom = DefinableSet.make("0 <= z", {"z": Sort.ZZ})
    r = integrate(fd, f, dom, SearchBox(0, 0, 1, 0, 9))
    assert r.exact and r.tail == "resolved-geometric"
    assert r.exact_value == 1 / (1 - Fraction(5) ** -2)


def test_unknown_cells_are_reported_not_guessed():
    from dpwb.localfield import make_truncated
    fd = FieldDesc("Qp", 5)
    dom = DefinableSet.make("x - a = 0 \\/ 0 <= ord(x - a)",
                            {"x": Sort.VF, "a": Sort.VF})
    # a known only to two digits: deep cells near a cannot be decided
    a = make_truncated(fd, 0, [2, 3])
    r = integrate(fd, ONE, dom, SearchBox(0, 6, 3, 0, 0), depth=3,
                  fixed={"a": a})
    assert r.unknown_mass > 0


def test_budget():
    from dpwb.errors import BudgetError
    fd = FieldDesc("Qp", 13)
    f = MotivicExpFunction((ExpTerm(g=parse_term("x"), g_shift=-2),))
    with pytest.raises(BudgetError):
        integrate(fd, f, O_X, BOX, depth=3, budget=10)


def test_measure_density():
    # density p^{-ord x} against the flat integrand = the closed form again
    fd = FieldDesc("Qp", 5)
    r = integrate(fd, ONE, O_X, BOX, measure=MeasureSpec(density=QINV))
    assert r.exact and r.exact_value == Fraction(5, 6)


def test_depth_validation():
    fd = FieldDesc("Qp", 5)
    with pytest.raises(InputError):
        integrate(fd, ONE, O_X, BOX, depth=99)


# ---------------------------------------------------------------------------
# probes
# ---------------------------------------------------------------------------

def test_check_integrable_examples():
    fd = FieldDesc("Qp", 5)
    assert check_integrable(fd, QINV, O_X, BOX).kind == "LikelyIntegrable"
    ostar = DefinableSet.make("0 <= ord(x)", {"x": Sort.VF})
    assert check_integrable(fd, QPLUS, ostar, BOX).kind == "LikelyDivergent"
    q2plus = MotivicFunction((MotivicTerm(
        alpha=ZFunction.from_text("ord(x) + ord(x)")),))
    assert check_integrable(fd, q2plus, ostar, BOX).kind == "LikelyDivergent"


def test_check_integrable_carries_evidence():
    fd = FieldDesc("Qp", 5)
    v = check_integrable(fd, QINV, O_X, BOX)
    assert len(v.partials) == len(v.increments) > 5
    assert v.partials[-1] == pytest.approx(5 / 6, abs=1e-6)


def test_check_bounded_examples():
    fd = FieldDesc("Qp", 5)
    r1 = check_bounded(fd, QINV, O_X, BOX)
    assert r1.sup == 1 and r1.verdict == "bounded"
    assert r1.witness["x"].v == 0
    ostar = DefinableSet.make("0 <= ord(x)", {"x": Sort.VF})
    r2 = check_bounded(fd, QPLUS, ostar, BOX)
    assert r2.verdict == "unbounded-suspected"
    three = MotivicFunction((MotivicTerm(alpha=ZFunction.const(0),
                                         betas=(ZFunction.const(3),)),))
    r3 = check_bounded(fd, three, O_X, BOX)
    assert r3.sup == 3 and r3.verdict == "bounded"


# ---------------------------------------------------------------------------
# integrating a variable out (closure property, empirically)
# ---------------------------------------------------------------------------

def test_integrate_out_constant_in_x():
    fd = FieldDesc("Qp", 5)
    dom = vf_ring_domain(["x", "y"])
    f = MotivicFunction((MotivicTerm(alpha=ZFunction.from_text("0 - ord(y)")),))
    for c in (1, 2, 7):
        r = integrate_out(fd, f, {"x": embed_constant(fd, c)}, dom, BOX)
        assert r.exact and r.exact_value == Fraction(5, 6)


def test_integrate_out_refuses_divergent():
    fd = FieldDesc("Qp", 5)
    dom = DefinableSet.make("0 <= ord(y)", {"y": Sort.VF})
    f = MotivicFunction((MotivicTerm(alpha=ZFunction.from_text("ord(y)")),))
    with pytest.raises(IntegrabilityRefusal) as ei:
        integrate_out(fd, f, {}, dom, BOX)
    assert ei.value.verdict.kind == "LikelyDivergent"
