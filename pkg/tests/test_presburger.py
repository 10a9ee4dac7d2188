"""Quantifier elimination and 1-D normal forms, checked against bounded
brute-force evaluation."""

import random

import numpy as np
import pytest

from conftest import brute_presburger
from dpwb.errors import SortError
from dpwb.presburger import (PresburgerSet, normalize_1d, pres_eval, presburger_qe,
                             set_to_formula)
from dpwb.syntax import parse_formula


def _equiv_on_window(s: PresburgerSet, f, lo=-60, hi=60):
    xs = np.arange(lo, hi + 1)
    want = brute_presburger(f, list(s.varnames), [xs] * s.r)
    for idx in np.ndindex(want.shape):
        point = tuple(int(xs[i]) for i in idx)
        assert s.contains(point) == bool(want[idx]), point


def test_parity():
    f = parse_formula("exists y:ZZ (x = y + y)")
    s = presburger_qe(f)
    assert all(s.contains((x,)) == (x % 2 == 0) for x in range(-100, 101))
    # exactly the single congruence x === 0 mod 2
    assert len(s.disjuncts) == 1
    dj = s.disjuncts[0]
    assert not dj.ineqs and [(c.row, c.const, c.modulus) for c in dj.congs] == [((1,), 0, 2)]


def test_always_satisfiable():
    s = presburger_qe(parse_formula("exists y:ZZ (y <= x)"))
    assert all(s.contains((x,)) for x in range(-100, 101))


def test_triple_with_sign():
    f = parse_formula("exists y:ZZ (x = y + y + y /\\ 0 <= y)")
    s = presburger_qe(f)
    assert all(s.contains((x,)) == (x % 3 == 0 and x >= 0) for x in range(-100, 101))


def test_rejects_non_zz_input():
    with pytest.raises(SortError):
        presburger_qe(parse_formula("ord(x) = 0"))
    with pytest.raises(SortError):
        presburger_qe(parse_formula("exists y:VF (y = y)"))


def test_eval_paths():
    s = presburger_qe(parse_formula("x === 0 mod 2"))
    assert pres_eval(s, (4,)) and not pres_eval(s, (7,))
    # quantified input goes through elimination first
    assert pres_eval(parse_formula("exists y:ZZ (x = y + y)"), (6,))
    assert not pres_eval(parse_formula("exists y:ZZ (x = y + y)"), (7,))


def test_idempotence_on_quantifier_free():
    f = parse_formula("x === 1 mod 3 /\\ 0 <= x \\/ x = -2")
    s1 = presburger_qe(f)
    s2 = presburger_qe(set_to_formula(s1))
    assert all(s1.contains((x,)) == s2.contains((x,)) for x in range(-50, 51))


@pytest.mark.parametrize("text,expected", [
    ("3 <= x /\\ x === 1 mod 2", [(3, 2, "+")]),
    ("x = 5", [(5, 0, "point")]),
    ("x === 0 mod 2", [(-2, 2, "-"), (0, 2, "+")]),
])
def test_normalize_1d_examples(text, expected):
    entries = normalize_1d(presburger_qe(parse_formula(text)))
    assert sorted((e.base, e.step, e.direction) for e in entries) == sorted(expected)


def test_normalize_1d_merges_congruence_splits():
    # {0 mod 4} union {2 mod 4} is just the even numbers: one step-2 pair
    s = presburger_qe(parse_formula("x === 0 mod 4 \\/ x === 2 mod 4"))
    entries = normalize_1d(s)
    assert sorted((e.base, e.step, e.direction) for e in entries) == \
        [(-2, 2, "-"), (0, 2, "+")]


def test_normalize_1d_hole_and_points():
    s = presburger_qe(parse_formula("x === 0 mod 2 /\\ ~(x = 2)"))
    entries = normalize_1d(s)
    for x in range(-1000, 1001):
        assert any(e.contains(x) for e in entries) == (x % 2 == 0 and x != 2)
    s2 = presburger_qe(parse_formula("0 <= x /\\ x <= 4"))
    entries2 = normalize_1d(s2)
    assert sorted(e.base for e in entries2) == [0, 1, 2, 3, 4]
    assert all(e.direction == "point" for e in entries2)


def test_normalize_1d_reconstruction_windows():
    rng = random.Random(11)
    shapes = [
        "exists y:ZZ (x = {c}*y + {k})",
        "{k} <= x /\\ x === {r} mod {d}",
        "x <= {k} \\/ x === {r} mod {d}",
        "exists y:ZZ (x = y + y /\\ y <= {k})",
        "~(x === {r} mod {d}) /\\ -40 <= x",
    ]
    for _ in range(40):
        text = rng.choice(shapes).format(c=rng.randint(1, 3), k=rng.randint(-9, 9),
                                         r=rng.randint(0, 3), d=rng.choice([2, 3, 4]))
        s = presburger_qe(parse_formula(text))
        entries = normalize_1d(s)
        for x in range(-1000, 1001):
            assert any(e.contains(x) for e in entries) == s.contains((x,)), (text, x)


# ---------------------------------------------------------------------------
# randomized QE soundness against the bounded-search oracle
# ---------------------------------------------------------------------------

def make_formula(rng: random.Random) -> tuple[str, list[str]]:
    """Shapes tuned so every true quantifier has a witness within +-150
    when the free variables range over [-50, 50]."""
    c = rng.randint(1, 3)
    k = rng.randint(-10, 10)
    d = rng.choice([2, 3, 4])
    r = rng.randint(0, d - 1)
    shape = rng.randint(0, 6)
    if shape == 0:
        return f"exists y:ZZ (x = {c}*y + {k} /\\ 0 <= y)", ["x"]
    if shape == 1:
        return f"exists y:ZZ (x = {c}*y /\\ y === {r} mod {d})", ["x"]
    if shape == 2:
        return f"forall y:ZZ (~(x = {c}*y + {k}) \\/ x <= y + 45)", ["x"]
    if shape == 3:
        return (f"exists y:ZZ (exists w:ZZ (x = y + w /\\ y <= {k} "
                f"/\\ w === {r} mod {d}))", ["x"])
    if shape == 4:
        return (f"forall y:ZZ (exists w:ZZ (x + y = w + w \\/ x + y = w + w + 1))",
                ["x"])
    if shape == 5:
        return f"exists y:ZZ (y + y <= x + z /\\ x + z <= y + y + {abs(k)})", ["x", "z"]
    return f"x + z === {r} mod {d} /\\ ~(x <= {k})", ["x", "z"]


def test_qe_matches_bounded_brute_force():
    rng = random.Random(20240)
    for _ in range(80):
        text, free = make_formula(rng)
        f = parse_formula(text)
        s = presburger_qe(f, varnames=tuple(free))
        lo, hi = (-50, 50) if len(free) == 1 else (-20, 20)
        xs = np.arange(lo, hi + 1)
        want = brute_presburger(f, free, [xs] * len(free))
        for idx in np.ndindex(want.shape):
            point = tuple(int(xs[i]) for i in idx)
            assert s.contains(point) == bool(want[idx]), (text, point)
