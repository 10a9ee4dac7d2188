"""Tour of the three-sorted formula language: parsing, sort inference,
formatting, and what the sort checker refuses.

Run:  python demos/01_formulas_and_sorts.py
"""

from dpwb import SortError, format_formula, parse_formula, typecheck

print("== parsing and sort inference ==")
units = parse_formula("exists y:VF (y*x = 1)")
sig = typecheck(units)
print(f"  {format_formula(units)}")
print(f"  free variables: {sig.free}  counts (n,m,r) = {sig.counts}")

parity = parse_formula("exists y:ZZ (x = y + y)")
print(f"  {format_formula(parity)}  ->  {typecheck(parity).free}")

# ord maps the valued field into the value group; ac into the residue field,
# and literals take whatever sort the context forces on them
mixed = parse_formula("ord(x) = z /\\ ac(x) = 1")
print(f"  {format_formula(mixed)}  ->  {typecheck(mixed).free}")

print("\n== round trips ==")
for text in ["ac(x) = 0", "x === y mod 3 \\/ ~(x <= y)",
             "forall v:RF (exists w:RF (v + w = 0))"]:
    f = parse_formula(text)
    again = parse_formula(format_formula(f))
    print(f"  {text!r:48} reparses equal: {f == again}")

print("\n== what the checker rejects ==")
for text in ["x + ord(x) = 0",      # VF + ZZ
             "x * y <= 1",          # multiplication of two ZZ variables
             "ac(x) <= 1",          # <= lives in the value group
             "x === y mod 1"]:      # modulus must be >= 2
    try:
        typecheck(parse_formula(text))
        print(f"  {text!r}: accepted (unexpected!)")
    except SortError as e:
        print(f"  {text!r}: rejected: {e}")
