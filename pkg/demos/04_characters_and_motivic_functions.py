"""Additive characters, exact root-of-unity sums, and motivic (exponential)
function evaluation.

Run:  python demos/04_characters_and_motivic_functions.py
"""

import math
from fractions import Fraction

from dpwb import (DefinableSet, ExpTerm, FieldDesc, MotivicExpFunction,
                  MotivicFunction, MotivicTerm, RootSum, SearchBox, Sort, ZFunction,
                  canonical_character, embed_constant, eval_exp, eval_motivic,
                  parse_motivic_file, parse_term, residue_character)

fd = FieldDesc("Qp", 5)
box = SearchBox(-2, 4, 2, -8, 8)

print("== the canonical character ==")
print(f"  L(t) = {canonical_character(fd, fd.uniformizer())}   (trivial on the ideal)")
print(f"  L(1) = {canonical_character(fd, embed_constant(fd, 1))}")
s = RootSum.zero(5)
for a in range(5):
    s = s + residue_character(fd, a)
print(f"  sum of Lbar over F_5 = {s}   (exact cancellation)")

g = RootSum.zero(5)
for y in range(5):
    g = g + residue_character(fd, y * y)
print(f"  quadratic Gauss sum: {g}; |.| = {abs(g):.12f} = sqrt(5)?"
      f" {abs(abs(g) - math.sqrt(5)) < 1e-12}")

print("\n== a motivic function, evaluated exactly ==")
worked = MotivicFunction((MotivicTerm(
    alpha=ZFunction.from_text("ord(x)"),
    betas=(ZFunction.const(1),),
    fiber=DefinableSet.make("y1 * y1 = ac(x)", {"x": Sort.VF, "y1": Sort.RF}),
    geom=(-2,),
),))
x = embed_constant(fd, 5)
val = eval_motivic(fd, box, worked, {"x": x})
print(f"  q^ord(x) * #(y^2 = ac x) / (1 - q^-2) at x = 5:  {val}")
assert val == Fraction(125, 12)

print("\n== exponential functions ==")
gauss = MotivicExpFunction((ExpTerm(
    fiber=DefinableSet.make("y1 = y1", {"y1": Sort.RF}),
    e=parse_term("y1 * y1"),
),))
v = eval_exp(fd, box, gauss, {})
print(f"  sum over the residue field of Lbar(y^2) = {v}")
print(f"  twisted by the unit 2: {eval_exp(fd, box, gauss, {}, twist=2)}")

print("\n== the same objects from a file ==")
text = """
var x : VF
motivic inv_ord {
  term { alpha: 0 - ord(x); fiber(r=1): y1 * y1 = ac(x); geom: [-2]; }
}
"""
mf = parse_motivic_file(text)
print(f"  inv_ord(5) = {eval_motivic(fd, box, mf.motivic['inv_ord'], {'x': x})}")
