"""QC-norm of the Oskolkov polynomials against their sup norm.

The sup norm grows like n while the QC-norm stays close to sqrt(n).
Run: python demos/oskolkov_qc.py
"""
import math

from sidonkit import norm_sup, oskolkov_poly, qc_exact

print(f"{'n':>3} {'sup':>10} {'qc':>10} {'qc/sqrt(n)':>11}")
for n in range(2, 11):
    t = oskolkov_poly(n)
    sup = norm_sup(t, 1e-6).upper
    qc = qc_exact(t, 1e-5).value
    print(f"{n:>3} {sup:>10.6f} {qc:>10.6f} {qc / math.sqrt(n):>11.4f}")
