"""Arithmetic in truncated models of Q_p and F_p((t)): expansions, the
valuation and angular component, exact versus truncated elements, and how
cancellation consumes precision.

Run:  python demos/02_local_fields.py
"""

from fractions import Fraction

from dpwb import (FieldDesc, PrecisionError, embed_constant, enumerate_ball,
                  make_truncated, qp_from_fraction, vf_ac, vf_add, vf_inv, vf_mul,
                  vf_neg, vf_ord, vf_sub)

q5 = FieldDesc("Qp", 5)
f5 = FieldDesc("FpT", 5)

print("== embedding constants ==")
seven = embed_constant(q5, 7)
print(f"  7 in {q5}:      {seven}        (7 = 2 + 1*5)")
print(f"  7 in {f5}:      {embed_constant(f5, 7)}   (reduction mod 5)")
poly = embed_constant(f5, [3, 2, 1])
print(f"  3+2t+t^2 in {f5}: {poly}")

print("\n== ord and ac ==")
for fd in (q5, f5):
    pi = fd.uniformizer()
    print(f"  {fd}: ord(t) = {vf_ord(pi)}, ac(t) = {vf_ac(pi)}, "
          f"ord(7) = {vf_ord(embed_constant(fd, 7))}")
x = qp_from_fraction(q5, Fraction(17, 5))
print(f"  x with 5x = 17: {x}; ord = {vf_ord(x)}, ac = {vf_ac(x)}")

print("\n== exact arithmetic stays exact ==")
a = vf_mul(vf_add(embed_constant(q5, 1), embed_constant(q5, 5)),
           vf_sub(embed_constant(q5, 1), embed_constant(q5, 5)))
print(f"  (1+5)(1-5) = {a}   <- the repeating digits of -24")
print(f"  1/t: {vf_inv(q5.uniformizer())}")

print("\n== truncation is honest ==")
t1 = make_truncated(q5, 0, [2, 3, 1])
t2 = make_truncated(q5, 0, [3, 1, 1])
print(f"  {t1} + {t2} = {vf_add(t1, t2)}")
try:
    vf_add(t1, vf_neg(t1))
except PrecisionError as e:
    print(f"  x - x on truncated input: {e}")

print("\n== ball representatives ==")
fd2 = FieldDesc("Qp", 2)
reps = list(enumerate_ball(fd2, 0, 0, 2))
print(f"  units of Z_2 mod 4: {[r.to_literal() for r in reps[1:]]}")
print(f"  counting check: (p-1) p^(d-1) per valuation "
      f"-> {len(list(enumerate_ball(q5, 0, 1, 2))) - 1} for p=5, d=2, v in [0,1]")
