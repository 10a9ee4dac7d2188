"""Cross-characteristic experiments and uniform bound fitting."""

import pytest

from dpwb.errors import InputError
from dpwb.localfield import FieldDesc
from dpwb.motivic import parse_motivic_file
from dpwb.semantics import DefinableSet, SearchBox
from dpwb.syntax import Sort
from dpwb.transfer import (StatementSpec, parse_statement_file, transfer_experiment,
                           uniform_bound_fit)

BOX = SearchBox(vmin=0, vmax=8, depth=1, zmin=-8, zmax=8)

STMT_TEXT = """
var x : VF
var L : ZZ
motivic qinv { term { alpha: 0 - ord(x); } }
motivic qplus { term { alpha: ord(x); } }
motivic plam { term { alpha: L; } }
exp lam1 { term { alpha: 0; g: x; } }
statement int_qinv {
  kind: integrability;
  function: qinv;
  domain: x = 0 \\/ 0 <= ord(x);
  twists: [1, 2];
}
statement div_qplus {
  kind: integrability;
  function: qplus;
  domain: 0 <= ord(x);
}
statement sq2 { kind: truth; formula: exists u:RF (u * u = 2); }
statement bounded_lam {
  kind: boundedness;
  function: lam1;
  domain: x = 0 \\/ 0 <= ord(x);
  twists: [1, 2];
}
statement bnd_plam {
  kind: bound(a=0, b=1);
  function: plam;
  domain: 0 <= L;
  lambda: [L];
}
motivic p2lam { term { alpha: L + L; } }
statement bnd_too_small {
  kind: bound(a=0, b=1);
  function: p2lam;
  domain: 0 <= L;
  lambda: [L];
}
"""


@pytest.fixture(scope="module")
def sfile():
    return parse_statement_file(STMT_TEXT)


def test_statement_file_parses(sfile):
    assert set(sfile.statements) == {"int_qinv", "div_qplus", "sq2", "bounded_lam",
                                     "bnd_plam", "bnd_too_small"}
    assert sfile.statements["int_qinv"].twists == (1, 2)
    assert sfile.statements["bnd_plam"].bound_b == 1


def test_statement_validation():
    with pytest.raises(InputError):
        StatementSpec("s", "integrability")
    with pytest.raises(InputError):
        StatementSpec("s", "nonsense")
    with pytest.raises(InputError):
        StatementSpec("s", "truth",
                      formula=DefinableSet.make("ord(x) = 0", {"x": Sort.VF}))


def test_integrability_transfer(sfile):
    rep = transfer_experiment(sfile.statements["int_qinv"], [5, 7, 11], BOX)
    assert all(r.qp is True and r.fpt is True and r.agree for r in rep.rows)
    assert rep.stable_from == 5 and not rep.disagreements


def test_divergence_agrees_too(sfile):
    rep = transfer_experiment(sfile.statements["div_qplus"], [5, 7], BOX)
    assert all(r.qp is False and r.fpt is False and r.agree for r in rep.rows)


def test_truth_varies_with_p_but_families_agree(sfile):
    rep = transfer_experiment(sfile.statements["sq2"], [5, 7, 11, 13, 17], BOX)
    verdicts = {r.p: r.qp for r in rep.rows}
    # 2 is a square mod p iff p = +-1 mod 8
    assert verdicts == {5: False, 7: True, 11: False, 13: False, 17: True}
    assert all(r.agree for r in rep.rows)


def test_bound_statement(sfile):
    rep = transfer_experiment(sfile.statements["bnd_plam"], [5, 7],
                              SearchBox(0, 0, 1, 0, 6))
    assert all(r.qp and r.fpt and r.agree for r in rep.rows)
    # and a bound that genuinely fails, identically across families
    rep2 = transfer_experiment(sfile.statements["bnd_too_small"], [5, 7],
                               SearchBox(0, 0, 1, 0, 6))
    assert all(r.qp is False and r.fpt is False and r.agree for r in rep2.rows)
    assert not rep2.disagreements


def test_exponential_boundedness_with_twists(sfile):
    rep = transfer_experiment(sfile.statements["bounded_lam"], [5, 7], BOX)
    assert all(r.agree for r in rep.rows)


def test_primes_validated(sfile):
    with pytest.raises(InputError):
        transfer_experiment(sfile.statements["sq2"], [2, 5], BOX)


def test_disagreement_list_monotone_in_primes(sfile):
    # adding primes can only extend the recorded disagreement list
    small = transfer_experiment(sfile.statements["int_qinv"], [5, 7], BOX)
    big = transfer_experiment(sfile.statements["int_qinv"], [5, 7, 11], BOX)
    small_ps = {d["p"] for d in small.disagreements}
    big_ps = {d["p"] for d in big.disagreements}
    assert small_ps <= big_ps


def test_rf_only_statements_forced_agreement():
    # self-test: a statement whose verdict only depends on the residue field
    # must agree at every prime
    text = """
    statement cube { kind: truth; formula: exists u:RF (u * u * u = 2); }
    """
    sfile = parse_statement_file(text)
    rep = transfer_experiment(sfile.statements["cube"], [5, 7, 11, 13], BOX)
    assert all(r.agree for r in rep.rows)


# ---------------------------------------------------------------------------
# uniform bound fitting
# ---------------------------------------------------------------------------

FIELDS = [FieldDesc("Qp", 5), FieldDesc("FpT", 7)]
ZBOX = SearchBox(0, 0, 1, 0, 0)


def test_fit_p_power(sfile):
    dom = DefinableSet.make("0 <= L", {"L": Sort.ZZ})
    fit = uniform_bound_fit(sfile.functions["plam"], dom, ["L"], FIELDS, ZBOX)
    assert fit.ok and (fit.a, fit.b) == (0, 1)
    assert fit.record["a_by_window"][0][-1] != fit.record["a_by_window"][0][-2], \
        "b=0 must be rejected because its fitted a keeps growing"


def test_fit_decaying_polynomial_times_power():
    mf = parse_motivic_file(
        "var L : ZZ\nmotivic f { term { alpha: 0 - L; beta: L + 1; } }")
    dom = DefinableSet.make("0 <= L", {"L": Sort.ZZ})
    fit = uniform_bound_fit(mf.motivic["f"], dom, ["L"], FIELDS, ZBOX)
    assert fit.ok and (fit.a, fit.b) == (0, 0)


def test_fit_detects_unbounded_hypothesis():
    mf = parse_motivic_file("var w : VF\nmotivic g { term { alpha: ord(w); } }")
    dom = DefinableSet.make("0 <= ord(w)", {"w": Sort.VF})
    fit = uniform_bound_fit(mf.motivic["g"], dom, [], [FieldDesc("Qp", 5)],
                            SearchBox(0, 8, 1, 0, 0))
    assert not fit.ok
    assert "hypothesis_violation" in fit.record


def test_fit_without_lambda_coordinates(sfile):
    # n = 0: a bounded motivic function gets a plain q^a bound with b = 0
    dom = DefinableSet.make("0 <= ord(x)", {"x": Sort.VF})
    fit = uniform_bound_fit(sfile.functions["qinv"], dom, [],
                            [FieldDesc("Qp", 5)], SearchBox(0, 6, 1, 0, 0))
    assert fit.ok and (fit.a, fit.b) == (0, 0)


def test_fit_minimality_is_recorded(sfile):
    dom = DefinableSet.make("0 <= L", {"L": Sort.ZZ})
    fit = uniform_bound_fit(sfile.functions["plam"], dom, ["L"], FIELDS, ZBOX)
    assert "minimality" in fit.record and fit.record["tightest"] is not None
