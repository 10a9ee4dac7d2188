"""Three-valued model checking: definite verdicts where the box suffices,
honest Unknowns where it cannot, and definable-set enumeration.

Run:  python demos/03_model_checking.py
"""

from dpwb import (DefinableSet, FieldDesc, SearchBox, Sort, count_rf_fiber,
                  embed_constant, enumerate_set, eval_formula, parse_formula,
                  vf_zero)

fd = FieldDesc("Qp", 5)
box = SearchBox(vmin=-2, vmax=4, depth=2, zmin=-8, zmax=8)

print("== residue-field quantifiers are exact ==")
sq = parse_formula("exists u:RF (u * u = ac(x))")
for c in (1, 2, 3, 4):
    v = eval_formula(fd, box, {"x": embed_constant(fd, c)}, sq)
    print(f"  ac = {c}: square? {v.value}   (squares mod 5 are 0, 1, 4)")

print("\n== valued-field witness search is one-sided ==")
root = parse_formula("exists y:VF (y * y = x)")
v = eval_formula(fd, box, {"x": embed_constant(fd, 2)}, root)
print(f"  sqrt(2) in Q_5: {v.value}  (absence is never certified by a box)")

print("\n== zero is special ==")
ordf = parse_formula("0 <= ord(x)")
ring = parse_formula("x = 0 \\/ 0 <= ord(x)")
print(f"  '0 <= ord(x)' at x=0: {eval_formula(fd, box, {'x': vf_zero(fd)}, ordf).value}"
      "   (ord is undefined there)")
print(f"  ring formula at x=0:  {eval_formula(fd, box, {'x': vf_zero(fd)}, ring).value}")

print("\n== enumerating definable sets ==")
units = DefinableSet.make("ord(x) = 0", {"x": Sort.VF})
enum = enumerate_set(fd, SearchBox(0, 2, 1, 0, 0), units)
print(f"  units found in the box: {[t[0].to_literal() for t in enum.true]}")

zz = DefinableSet.make("z === 1 mod 3", {"z": Sort.ZZ})
enum2 = enumerate_set(fd, SearchBox(0, 0, 1, 0, 9), zz)
print(f"  z = 1 mod 3 on [0, 9]: {[t[0] for t in enum2.true]}")

print("\n== residue fibers ==")
fib = DefinableSet.make("y * y = ac(x)", {"y": Sort.RF, "x": Sort.VF})
for label, x in [("x = 1", embed_constant(fd, 1)), ("x = 2", embed_constant(fd, 2)),
                 ("x = t", fd.uniformizer()), ("x = 0", vf_zero(fd))]:
    print(f"  #fiber over {label}: {count_rf_fiber(fd, box, fib, {'x': x})}")
