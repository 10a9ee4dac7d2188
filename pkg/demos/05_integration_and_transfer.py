"""Integration against the canonical measure, integrability probes, and a
small cross-characteristic transfer experiment.

Run:  python demos/05_integration_and_transfer.py
"""

from fractions import Fraction

from dpwb import (ExpTerm, FieldDesc, MotivicExpFunction, MotivicFunction,
                  MotivicTerm, SearchBox, ZFunction, check_bounded,
                  check_integrable, integrate, integrate_out, parse_statement_file,
                  parse_term, transfer_experiment, vf_ring_domain)

box = SearchBox(vmin=0, vmax=8, depth=2, zmin=0, zmax=8)
O = vf_ring_domain("x")
one = MotivicFunction((MotivicTerm(alpha=ZFunction.const(0)),))
qinv = MotivicFunction((MotivicTerm(alpha=ZFunction.from_text("0 - ord(x)")),))

print("== exact integrals ==")
for family in ("Qp", "FpT"):
    fd = FieldDesc(family, 5)
    r0 = integrate(fd, one, O, box)
    r1 = integrate(fd, qinv, O, box)
    print(f"  {fd}: vol(O) = {r0.exact_value}, "
          f"int q^-ord = {r1.exact_value} [{r1.tail}]")
    assert r1.exact_value == Fraction(5, 6)

print("\n== an oscillating integrand needs depth 3 to resolve ==")
fd = FieldDesc("Qp", 5)
osc = MotivicExpFunction((ExpTerm(g=parse_term("x"), g_shift=-2),))
r = integrate(fd, osc, O, box, depth=3)
print(f"  int over O of L(t^-2 x): {r.exact_value} [{r.tail}], "
      f"{r.cells_used} cells")

print("\n== probes ==")
qplus = MotivicFunction((MotivicTerm(alpha=ZFunction.from_text("ord(x)")),))
from dpwb import DefinableSet, Sort
ostar = DefinableSet.make("0 <= ord(x)", {"x": Sort.VF})
print(f"  q^-ord on O:  {check_integrable(fd, qinv, O, box).kind}")
print(f"  q^+ord on O*: {check_integrable(fd, qplus, ostar, box).kind}")
b = check_bounded(fd, qplus, ostar, box)
print(f"  sup |q^ord| over the box = {float(b.sup):g} -> {b.verdict}")

print("\n== closure under integration, empirically ==")
O2 = vf_ring_domain(["x", "y"])
f2 = MotivicFunction((MotivicTerm(alpha=ZFunction.from_text("0 - ord(y)")),))
from dpwb import embed_constant
g = integrate_out(fd, f2, {"x": embed_constant(fd, 3)}, O2, box)
print(f"  (int over y) q^-ord(y) 1_OxO at x=3: {g.exact_value} "
      "(a motivic function of x, here the constant 5/6)")

print("\n== transfer experiment ==")
stmts = parse_statement_file("""
var x : VF
motivic qinv { term { alpha: 0 - ord(x); } }
statement int_qinv {
  kind: integrability; function: qinv;
  domain: x = 0 \\/ 0 <= ord(x); twists: [1, 2];
}
statement sq_minus1 { kind: truth; formula: exists u:RF (u * u + 1 = 0); }
""")
for name in ("int_qinv", "sq_minus1"):
    rep = transfer_experiment(stmts.statements[name], [5, 7, 11, 13],
                              SearchBox(0, 8, 1, 0, 6))
    rows = ", ".join(f"p={r.p}: Qp={r.qp} FpT={r.fpt} agree={r.agree}"
                     for r in rep.rows)
    print(f"  {name}: {rows}")
    print(f"    agreement stable from p = {rep.stable_from}; "
          f"disagreements: {len(rep.disagreements)}")
