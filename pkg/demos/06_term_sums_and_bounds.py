"""Sums of (linear factors) * q^(linear exponent) on Z: exact evaluation,
canonical merging, and certified minimal growth bounds q^(a + b|x|).

Run:  python demos/06_term_sums_and_bounds.py
"""

from dpwb import parse_tsum, tsum_bound, tsum_eval, tsum_merge, tsum_violations

print("== evaluation and merging ==")
h = parse_tsum("(L)*q^L on {0 <= L}")
print(f"  {h.render()} at q=5, L=2: {tsum_eval(h, 5, 2)}")
m = tsum_merge(parse_tsum("q^L + q^L - q^(L-1) + q^(L-1)"))
print(f"  q^L + q^L - q^(L-1) + q^(L-1)  merges to  {m.render()}")

print("\n== certified bounds ==")
for text in ["q^L on {0 <= L}",
             "(L+1)*q^(-L) on {0 <= L}",
             "q^L - q^(L-1) on {0 <= L}",
             "3*(L+1)*(2L-1)*q^(L-2) on {0 <= L}",
             "2*q^(-2L) - 3*q^(-3L) on {0 <= L}",
             "q^(2L) + q^L"]:
    h = parse_tsum(text)
    cert = tsum_bound(h)
    bad = tsum_violations(h, cert.a, cert.b)
    print(f"  {text:42} ->  (a, b) = ({cert.a}, {cert.b})"
          f"  certified={cert.certified}  brute violations={len(bad)}")
    if cert.a_witness:
        q, x = cert.a_witness
        print(f"      a is minimal: |h({q}, {x})| exceeds "
              f"{q}^({cert.a - 1} + {cert.b}|{x}|)")
    if cert.b_argument:
        print(f"      b is minimal: {cert.b_argument.splitlines()[0][:72]}...")

print("\n== the dominance table ==")
h = parse_tsum("q^L + 100*(L+1)*q^0 on {0 <= L}")
cert = tsum_bound(h)
for row in cert.dominance_thresholds:
    print(f"  on {row['component']}: the slope-{row['rising_slope']} term "
          f"overtakes the flat term past k = {row['threshold_k']}")
