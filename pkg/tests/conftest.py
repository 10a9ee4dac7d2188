"""Shared oracles and random-object generators for the test suite.

The oracles here are deliberately independent of the code paths they check:
the Presburger oracle evaluates quantifiers by bounded search on numpy
grids, the expansion oracles convert integers / polynomials to digit
strings by schoolbook division, and the random generators build elements
from raw digits.
"""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest

from dpwb import syntax as sx
from dpwb.localfield import (FieldDesc, VFElem, fpt_from_coeffs, make_truncated,
                             qp_from_fraction)


# ---------------------------------------------------------------------------
# Presburger brute-force oracle (bounded witness search on numpy grids)
# ---------------------------------------------------------------------------

def brute_presburger(f: sx.Formula, free_order: list[str], grids,
                     wlo: int = -150, whi: int = 150) -> np.ndarray:
    """Boolean truth table of f over the product grid of its free variables,
    with quantified variables searched exhaustively in [wlo, whi]."""

    def term(t, env):
        if isinstance(t, sx.IntLit):
            return t.value
        if isinstance(t, sx.Var):
            return env[t.name]
        if isinstance(t, sx.Add):
            return term(t.left, env) + term(t.right, env)
        if isinstance(t, sx.Neg):
            return -term(t.arg, env)
        if isinstance(t, sx.Mul):
            return term(t.left, env) * term(t.right, env)
        raise TypeError(t)

    def ev(node, env):
        if isinstance(node, sx.And):
            return ev(node.left, env) & ev(node.right, env)
        if isinstance(node, sx.Or):
            return ev(node.left, env) | ev(node.right, env)
        if isinstance(node, sx.Not):
            return ~ev(node.arg, env)
        if isinstance(node, sx.Quant):
            env2 = {k: v[..., None] for k, v in env.items()}
            w = np.arange(wlo, whi + 1, dtype=np.int64)
            ndim = next(iter(env.values())).ndim if env else 0
            env2[node.var] = w.reshape((1,) * ndim + (-1,))
            res = ev(node.body, env2)
            return res.any(axis=-1) if node.kind == "exists" else res.all(axis=-1)
        if isinstance(node, sx.Eq):
            return term(node.left, env) == term(node.right, env)
        if isinstance(node, sx.Le):
            return term(node.left, env) <= term(node.right, env)
        if isinstance(node, sx.Cong):
            return (term(node.left, env) - term(node.right, env)) % node.modulus == 0
        raise TypeError(node)

    env = {}
    r = len(free_order)
    for i, name in enumerate(free_order):
        shape = [1] * r
        shape[i] = len(grids[i])
        env[name] = np.asarray(grids[i], dtype=np.int64).reshape(shape)
    out = ev(f, env)
    return np.broadcast_to(out, tuple(len(g) for g in grids))


# ---------------------------------------------------------------------------
# digit-expansion oracles
# ---------------------------------------------------------------------------

def int_digits_oracle(n: int, p: int, count: int) -> tuple[int, ...]:
    """Base-p digits of a nonnegative integer by schoolbook division."""
    out = []
    for _ in range(count):
        n, r = divmod(n, p)
        out.append(r)
    return tuple(out)


def rational_digits_oracle(x: Fraction, p: int, lo: int, count: int) -> tuple[int, ...]:
    """Expansion digits of a p-integral-at-lo rational on [lo, lo+count)."""
    digits = []
    x = x / Fraction(p) ** lo
    for _ in range(count):
        num, den = x.numerator, x.denominator
        d = num * pow(den, -1, p) % p
        digits.append(d)
        x = (x - d) / p
    return tuple(digits)


def poly_mul_mod(a: list[int], b: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % p
    return out


# ---------------------------------------------------------------------------
# random elements
# ---------------------------------------------------------------------------

def random_vf(fd: FieldDesc, rng: random.Random, vlo: int = -3, vhi: int = 4,
              exact_only: bool = False) -> VFElem:
    """Random nonzero element: exact (finite digit support) or truncated."""
    v = rng.randint(vlo, vhi)
    k = rng.randint(1, fd.N - 1)
    digits = [rng.randint(1, fd.p - 1)] + [rng.randint(0, fd.p - 1) for _ in range(k - 1)]
    if exact_only or rng.random() < 0.5:
        if fd.family == "Qp":
            val = sum(Fraction(d) * Fraction(fd.p) ** (v + i)
                      for i, d in enumerate(digits))
            return qp_from_fraction(fd, val)
        return fpt_from_coeffs(fd, v, digits)
    return make_truncated(fd, v, digits)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xD1F)
