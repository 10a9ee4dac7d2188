"""Characters and motivic (exponential) function evaluation."""

import math
import random
from fractions import Fraction

import pytest

from conftest import random_vf
from dpwb.errors import (CharacterPrecisionError, DomainError, GraphWitnessError,
                         UnresolvedError)
from dpwb.localfield import (FieldDesc, RFElem, embed_constant, fpt_from_coeffs,
                             make_truncated, qp_from_fraction, vf_add, vf_mul, vf_zero)
from dpwb.motivic import (ExpTerm, MotivicExpFunction, MotivicFunction, MotivicTerm,
                          ZFunction, canonical_character, eval_exp, eval_motivic,
                          parse_motivic_file, residue_character)
from dpwb.rootsum import RootSum
from dpwb.semantics import DefinableSet, SearchBox
from dpwb.syntax import Sort, parse_term

Q5 = FieldDesc("Qp", 5)
F5 = FieldDesc("FpT", 5)
BOX = SearchBox(-2, 4, 2, -8, 8)
FIELDS = [FieldDesc(fam, p) for fam in ("Qp", "FpT") for p in (3, 5, 7, 11, 13)]


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("fd", FIELDS, ids=str)
def test_character_trivial_on_maximal_ideal(fd):
    rng = random.Random(fd.p)
    for _ in range(30):
        x = random_vf(fd, rng, vlo=1, vhi=5)
        assert canonical_character(fd, x) == 1
    assert canonical_character(fd, vf_zero(fd)) == 1


@pytest.mark.parametrize("fd", FIELDS, ids=str)
def test_character_nontrivial_on_ring(fd):
    assert canonical_character(fd, embed_constant(fd, 1)) == RootSum.root(fd.p, 1, 1)
    assert canonical_character(fd, embed_constant(fd, 1)) != 1


@pytest.mark.parametrize("fd", FIELDS, ids=str)
def test_character_additive(fd):
    rng = random.Random(fd.p + 100)
    for _ in range(100):
        x = random_vf(fd, rng, vlo=-(fd.N - 3), vhi=3, exact_only=True)
        y = random_vf(fd, rng, vlo=-(fd.N - 3), vhi=3, exact_only=True)
        s = vf_add(x, y)
        assert canonical_character(fd, s) == \
            canonical_character(fd, x) * canonical_character(fd, y)


def test_character_values_unwound():
    # frac(x/p) semantics in Q_p: x = 17/5 = 2*5^-1 + 3 + ... gives
    # frac(x/5) = (2 + 3*5)/25 = 17/25
    x = qp_from_fraction(Q5, Fraction(17, 5))
    assert canonical_character(Q5, x) == RootSum.root(5, 2, 17)
    # digit-sum semantics in F_p((t)): 2 t^-1 + 3 maps to s = 2 + 3
    y = fpt_from_coeffs(F5, -1, [2, 3])
    assert canonical_character(F5, y) == RootSum.root(5, 1, 5 % 5)


def test_residue_character_compatibility():
    for fd in (Q5, F5):
        for a in range(fd.p):
            lift = embed_constant(fd, a) if a else vf_zero(fd)
            assert residue_character(fd, RFElem(a, fd.p)) == \
                canonical_character(fd, lift)
        s = RootSum.zero(fd.p)
        for a in range(fd.p):
            s = s + residue_character(fd, a).conjugate()
        assert s.is_zero
        # additivity on the residue field
        assert residue_character(fd, 3) * residue_character(fd, 4) == \
            residue_character(fd, (3 + 4) % fd.p)


def test_character_precision_requirement():
    x = make_truncated(Q5, -3, [2, 3])  # window ends at -1, digit 0 unknown
    with pytest.raises(CharacterPrecisionError):
        canonical_character(Q5, x)
    ok = make_truncated(Q5, -1, [2, 3, 1])
    canonical_character(Q5, ok)


def test_character_twists():
    x = embed_constant(Q5, 1)
    assert canonical_character(Q5, x, twist=2) == RootSum.root(5, 1, 2)
    assert canonical_character(Q5, x, twist=2) == \
        canonical_character(Q5, vf_mul(embed_constant(Q5, 2), x))
    assert residue_character(Q5, 3, twist=2) == RootSum.root(5, 1, 6)


# ---------------------------------------------------------------------------
# motivic evaluation
# ---------------------------------------------------------------------------

def _worked_instance():
    return MotivicFunction((MotivicTerm(
        alpha=ZFunction.from_text("ord(x)"),
        betas=(ZFunction.const(1),),
        fiber=DefinableSet.make("y1 * y1 = ac(x)", {"x": Sort.VF, "y1": Sort.RF}),
        geom=(-2,),
    ),))


def brute_worked_instance(fd, x) -> Fraction:
    """Independent re-derivation: enumerate the fiber by hand."""
    p = fd.p
    ac = x.digits[0] if not x.exact_zero else 0
    count = sum(1 for y in range(p) if (y * y - ac) % p == 0)
    return Fraction(p) ** x.v * count * Fraction(1, 1) / (1 - Fraction(p) ** -2)


def test_worked_instance_is_125_over_12():
    f = _worked_instance()
    x = embed_constant(Q5, 5)
    v = eval_motivic(Q5, BOX, f, {"x": x})
    assert v == Fraction(125, 12)
    assert v == brute_worked_instance(Q5, x)


def test_worked_instance_matches_brute_everywhere():
    f = _worked_instance()
    rng = random.Random(8)
    for fd in (Q5, F5, FieldDesc("Qp", 7), FieldDesc("FpT", 11)):
        for _ in range(25):
            x = random_vf(fd, rng, -2, 3)
            assert eval_motivic(fd, BOX, f, {"x": x}) == brute_worked_instance(fd, x)


def test_full_rf_fiber_counts_the_field():
    fd7 = FieldDesc("Qp", 7)
    f = MotivicFunction((MotivicTerm(
        alpha=ZFunction.const(0),
        fiber=DefinableSet.make("y1 = y1", {"y1": Sort.RF}),
    ),))
    assert eval_motivic(fd7, BOX, f, {}) == 7


def test_cancellation_of_identical_terms():
    t = MotivicTerm(alpha=ZFunction.from_text("ord(x)"))
    tneg = MotivicTerm(alpha=ZFunction.from_text("ord(x)"),
                       betas=(ZFunction.const(-1),))
    f = MotivicFunction((t, tneg))
    rng = random.Random(9)
    for _ in range(20):
        assert eval_motivic(Q5, BOX, f, {"x": random_vf(Q5, rng)}) == 0


def test_termwise_linearity():
    terms = _worked_instance().terms + (MotivicTerm(
        alpha=ZFunction.const(1), betas=(ZFunction.const(2),), geom=(1,)),)
    whole = MotivicFunction(terms)
    rng = random.Random(10)
    for _ in range(20):
        x = random_vf(Q5, rng)
        total = sum(eval_motivic(Q5, BOX, MotivicFunction((t,)), {"x": x})
                    for t in terms)
        assert eval_motivic(Q5, BOX, whole, {"x": x}) == total


def test_domain_enforcement():
    f = MotivicFunction((MotivicTerm(alpha=ZFunction.const(0)),),
                        domain=DefinableSet.make("0 <= ord(x)", {"x": Sort.VF}))
    with pytest.raises(DomainError):
        eval_motivic(Q5, BOX, f, {"x": qp_from_fraction(Q5, Fraction(1, 5))})


def test_zfunction_graph_presentation():
    # graph of z = 2*ord(x), searched over the declared window
    graph = DefinableSet.make("zval = ord(x) + ord(x)",
                              {"zval": Sort.ZZ, "x": Sort.VF})
    zf = ZFunction(graph=graph, graph_var="zval", window=(-16, 16))
    assert zf.evaluate(Q5, BOX, {"x": embed_constant(Q5, 25)}) == 4
    # no witness in a too-small window: refuse rather than guess
    zf_bad = ZFunction(graph=graph, graph_var="zval", window=(-1, 1))
    with pytest.raises(GraphWitnessError):
        zf_bad.evaluate(Q5, BOX, {"x": embed_constant(Q5, 25)})
    # several witnesses: refuse
    multi = DefinableSet.make("zval === 0 mod 2", {"zval": Sort.ZZ, "x": Sort.VF})
    with pytest.raises(GraphWitnessError):
        ZFunction(graph=multi, graph_var="zval").evaluate(
            Q5, BOX, {"x": embed_constant(Q5, 1)})


def test_zfunction_unresolved_at_zero():
    f = MotivicFunction((MotivicTerm(alpha=ZFunction.from_text("ord(x)")),))
    with pytest.raises(UnresolvedError):
        eval_motivic(Q5, BOX, f, {"x": vf_zero(Q5)})


# ---------------------------------------------------------------------------
# exponential evaluation
# ---------------------------------------------------------------------------

def test_degenerate_fiber_gives_the_character():
    f = MotivicExpFunction((ExpTerm(g=parse_term("x")),))
    x = embed_constant(Q5, 1)
    assert eval_exp(Q5, BOX, f, {"x": x}) == canonical_character(Q5, x)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_gauss_sum_instance(p):
    fd = FieldDesc("Qp", p)
    f = MotivicExpFunction((ExpTerm(
        fiber=DefinableSet.make("y1 = y1", {"y1": Sort.RF}),
        e=parse_term("y1 * y1"),
    ),))
    val = eval_exp(fd, BOX, f, {})
    brute = RootSum.zero(p)
    for y in range(p):
        brute = brute + RootSum.root(p, 1, (y * y) % p)
    assert val == brute
    assert abs(abs(val) - math.sqrt(p)) < 1e-12


def test_full_character_sum_cancels():
    f = MotivicExpFunction((ExpTerm(
        fiber=DefinableSet.make("y1 = y1", {"y1": Sort.RF}),
        e=parse_term("y1"),
    ),))
    assert eval_exp(Q5, BOX, f, {}).is_zero
    assert eval_exp(F5, BOX, f, {}).is_zero


def test_exp_with_motivic_factor_and_gshift():
    # q^(-ord x) * Lambda(w^-1 x): at x = i(1) this is Lambda(1/5) = zeta_25
    factor = MotivicFunction((MotivicTerm(alpha=ZFunction.from_text("0 - ord(x)")),))
    f = MotivicExpFunction((ExpTerm(factor=factor, g=parse_term("x"), g_shift=-1),))
    v = eval_exp(Q5, BOX, f, {"x": embed_constant(Q5, 1)})
    assert v == RootSum.root(5, 2, 1)


def test_gauss_sum_twisted_magnitude():
    # |sum_y conj(L)(c y^2)| = sqrt(p) for any unit twist c
    f = MotivicExpFunction((ExpTerm(
        fiber=DefinableSet.make("y1 = y1", {"y1": Sort.RF}),
        e=parse_term("y1 * y1"),
    ),))
    for p in (3, 5, 7, 11, 13):
        fd = FieldDesc("FpT", p)
        for twist in range(1, p):
            assert abs(abs(eval_exp(fd, BOX, f, {}, twist=twist)) - math.sqrt(p)) < 1e-12


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

MOT_TEXT = """
# inverse-ord with a square-root fiber
var x : VF
motivic inv_ord {
  term { alpha: 0 - ord(x); beta: 1; fiber(r=1): y1 * y1 = ac(x); geom: [-2]; }
  domain: x = 0 \\/ 0 <= ord(x);
}
exp gauss {
  term { fiber(r=1): y1 = y1; g: 0; e: y1 * y1; }
}
exp shifted {
  term { alpha: 0; g: x; gshift: -2; }
}
"""


def test_motivic_file_round_trip_evaluation():
    mf = parse_motivic_file(MOT_TEXT)
    assert set(mf.motivic) == {"inv_ord"} and set(mf.exp) == {"gauss", "shifted"}
    g = mf.motivic["inv_ord"]
    # alpha = -ord(x): at x=i(5), p=5: 5^-1 * 2 * 25/24 = 5/12
    assert eval_motivic(Q5, BOX, g, {"x": embed_constant(Q5, 5)}) == Fraction(5, 12)
    assert abs(abs(eval_exp(Q5, BOX, mf.exp["gauss"], {})) - math.sqrt(5)) < 1e-12
    assert mf.exp["shifted"].terms[0].g_shift == -2


def test_motivic_file_rejects_zero_geom():
    with pytest.raises(Exception):
        parse_motivic_file("var x : VF\nmotivic f { term { geom: [0]; } }")
