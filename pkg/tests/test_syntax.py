"""Parser, formatter and sort checker."""

import pytest
from hypothesis import given, settings, strategies as st

from dpwb.errors import FormulaSyntaxError, SortError
from dpwb import syntax as sx
from dpwb.syntax import (Sort, parse_formula, parse_formula_file, format_formula,
                         free_vars, typecheck)


def test_units_formula_parses_and_types():
    f = parse_formula("exists y:VF (y*x = 1)")
    sig = typecheck(f)
    assert sig.counts == (1, 0, 0)
    assert sig.free == (("x", Sort.VF),)


def test_ac_of_zero_literal_parses():
    f = parse_formula("ac(x) = 0")
    sig = typecheck(f, {"x": Sort.VF})
    assert sig.counts == (1, 0, 0)
    # the literal picked up the residue-field sort through ac
    assert isinstance(f, sx.Eq) and isinstance(f.left, sx.Ac)


def test_parity_formula():
    f = parse_formula("exists y:ZZ (x = y + y)")
    sig = typecheck(f)
    assert sig.free == (("x", Sort.ZZ),)


def test_ord_signature():
    sig = typecheck(parse_formula("ord(x) = z"))
    assert sig.counts == (1, 0, 1)
    assert sig.names() == ("x", "z")


def test_mixed_sort_addition_rejected():
    with pytest.raises(SortError):
        typecheck(parse_formula("x + ord(x) = 0"))


def test_zz_multiplication_of_variables_rejected():
    with pytest.raises(SortError):
        typecheck(parse_formula("x * y <= 3"))
    # literal * term is fine and stays linear
    typecheck(parse_formula("3 * x <= 3"))
    typecheck(parse_formula("(x + 1) * 2 <= 3"))


def test_congruence_modulus_checks():
    typecheck(parse_formula("x === y mod 2"))
    with pytest.raises(SortError):
        typecheck(parse_formula("x === y mod 1"))
    with pytest.raises(FormulaSyntaxError):
        parse_formula("x === y mod z")


def test_unknown_sort_variable_is_an_error():
    with pytest.raises(SortError):
        typecheck(parse_formula("x = y"))
    sig = typecheck(parse_formula("x = y"), {"x": Sort.RF})
    assert sig.free == (("x", Sort.RF), ("y", Sort.RF))


def test_syntax_error_positions():
    with pytest.raises(FormulaSyntaxError) as ei:
        parse_formula("exists y:VF (y*x = ")
    assert "line" in str(ei.value)
    with pytest.raises(FormulaSyntaxError):
        parse_formula("exists y:XX (y = 1)")


def test_format_examples():
    f = parse_formula("exists y:VF (y*x = 1)")
    assert format_formula(f) == "exists y:VF ((y * x) = 1)"
    g = parse_formula("exists y:ZZ (x = y + y)")
    assert format_formula(g) == "exists y:ZZ (x = (y + y))"


def test_quantifier_shadowing():
    f = parse_formula("exists x:RF (x = 1) /\\ ord(x) = 0")
    sig = typecheck(f)
    # the free x is pinned VF by ord; the bound x is a fresh RF variable
    assert sig.free == (("x", Sort.VF),)


def test_free_vars_reference_scan():
    f = parse_formula("exists y:VF (y * x = z + w) /\\ u <= 1")
    # a flat reference scan, independent of the Signature implementation
    def scan(node, bound):
        if isinstance(node, sx.Var):
            return [] if node.name in bound else [node.name]
        if isinstance(node, sx.Quant):
            return scan(node.body, bound | {node.var})
        out = []
        for attr in ("left", "right", "arg"):
            c = getattr(node, attr, None)
            if c is not None and isinstance(c, (sx.Formula, sx.Term)):
                out.extend(n for n in scan(c, bound) if n not in out)
        seen = []
        for n in out:
            if n not in seen:
                seen.append(n)
        return seen
    assert free_vars(f) == scan(f, frozenset())


# ---------------------------------------------------------------------------
# round-trip property: parse(format(f)) == f on generated well-sorted ASTs
# ---------------------------------------------------------------------------

def _zz_term(depth):
    if depth == 0:
        return st.one_of(st.integers(0, 9).map(sx.IntLit),
                         st.sampled_from(["z1", "z2"]).map(sx.Var))
    sub = _zz_term(depth - 1)
    return st.one_of(
        sub,
        st.tuples(sub, sub).map(lambda ab: sx.Add(*ab)),
        sub.map(sx.Neg),
        st.tuples(st.integers(2, 5).map(sx.IntLit), sub).map(lambda ab: sx.Mul(*ab)),
        _vf_term(depth - 1).map(sx.Ord),
    )


def _vf_term(depth):
    if depth == 0:
        return st.one_of(st.integers(0, 9).map(sx.IntLit),
                         st.just(sx.Unif()),
                         st.sampled_from(["x1", "x2"]).map(sx.Var))
    sub = _vf_term(depth - 1)
    return st.one_of(sub,
                     st.tuples(sub, sub).map(lambda ab: sx.Add(*ab)),
                     st.tuples(sub, sub).map(lambda ab: sx.Mul(*ab)),
                     sub.map(sx.Neg))


def _rf_term(depth):
    base = st.one_of(st.integers(0, 9).map(sx.IntLit),
                     st.sampled_from(["u1"]).map(sx.Var),
                     _vf_term(depth).map(sx.Ac))
    if depth == 0:
        return base
    sub = _rf_term(depth - 1)
    return st.one_of(base, st.tuples(sub, sub).map(lambda ab: sx.Add(*ab)))


def _atoms(depth):
    return st.one_of(
        st.tuples(_vf_term(depth), _vf_term(depth)).map(lambda ab: sx.Eq(*ab)),
        st.tuples(_rf_term(depth), _rf_term(depth)).map(lambda ab: sx.Eq(*ab)),
        st.tuples(_zz_term(depth), _zz_term(depth)).map(lambda ab: sx.Le(*ab)),
        st.tuples(_zz_term(depth), _zz_term(depth), st.integers(2, 7))
          .map(lambda abd: sx.Cong(*abd)),
    )


def _formulas(depth):
    if depth == 0:
        return _atoms(1)
    sub = _formulas(depth - 1)
    return st.one_of(
        _atoms(1),
        st.tuples(sub, sub).map(lambda ab: sx.And(*ab)),
        st.tuples(sub, sub).map(lambda ab: sx.Or(*ab)),
        sub.map(sx.Not),
        st.tuples(st.sampled_from(["exists", "forall"]),
                  st.sampled_from([("w", Sort.VF), ("v", Sort.RF), ("k", Sort.ZZ)]),
                  sub).map(lambda kvb: sx.Quant(kvb[0], kvb[1][0], kvb[1][1], kvb[2])),
    )

DECLARED = {"x1": Sort.VF, "x2": Sort.VF, "u1": Sort.RF, "z1": Sort.ZZ, "z2": Sort.ZZ}


@given(_formulas(3))
@settings(max_examples=300, deadline=None)
def test_round_trip(f):
    assert parse_formula(format_formula(f)) == f


@given(_formulas(3))
@settings(max_examples=200, deadline=None)
def test_generated_formulas_typecheck(f):
    sig = typecheck(f, DECLARED)
    for name, sort in sig.free:
        assert DECLARED[name] is sort


@given(_formulas(2), st.randoms())
@settings(max_examples=200, deadline=None)
def test_fuzzed_ill_sorted_trees_rejected(f, rnd):
    """Grafting a wrong-sorted subterm into a checked formula must fail."""
    bad = rnd.choice([
        sx.Eq(sx.Ord(sx.Var("x1")), sx.Ac(sx.Var("x2"))),   # ZZ vs RF
        sx.Le(sx.Ac(sx.Var("x1")), sx.IntLit(1)),           # <= needs ZZ
        sx.Eq(sx.Add(sx.Var("x1"), sx.Ord(sx.Var("x1"))), sx.IntLit(0)),
        sx.Cong(sx.Var("x1"), sx.IntLit(0), 3),             # VF in a congruence
        sx.Eq(sx.Mul(sx.Var("z1"), sx.Var("z2")), sx.IntLit(1)),
    ])
    with pytest.raises(SortError):
        typecheck(sx.And(f, bad), DECLARED)


# ---------------------------------------------------------------------------
# formula files
# ---------------------------------------------------------------------------

def test_formula_file():
    text = """
    # free variable declarations
    var x : VF
    var z : ZZ
    formula units := exists y:VF (y * x = 1)
    formula shifted := ord(x) = z
    """
    ff = parse_formula_file(text)
    assert set(ff.formulas) == {"units", "shifted"}
    assert ff.signature("shifted").counts == (1, 0, 1)


def test_formula_file_rejects_bad_lines():
    with pytest.raises(FormulaSyntaxError):
        parse_formula_file("frmula oops := x = 1")
    with pytest.raises(FormulaSyntaxError):
        parse_formula_file("var t : VF")
