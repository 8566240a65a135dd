"""Riesz products on a lacunary sequence, and splitting a slowly growing
sequence into pieces that are lacunary with ratio 7.

Run: python demos/riesz_and_split.py
"""
import numpy as np

from sidonkit import LacunarySequence, evaluate, riesz_product, split_lacunary, validate_lacunary

seq = LacunarySequence([3**k for k in range(1, 7)])
r = riesz_product(seq, 6)
x = np.linspace(0, 2 * np.pi, 1 << 16, endpoint=False)
v = evaluate(r, x)
print(f"Riesz product, m = 6: degree {r.degree}, constant {r.constant}, grid min {v.min():.3e}")

slow = [int(round(1.3**k)) for k in range(10, 40)]
lam = min(b / a for a, b in zip(slow, slow[1:]))
pieces = split_lacunary(slow, lam)
print(f"{len(slow)} terms with ratio >= {lam:.4f} split into {len(pieces)} pieces")
for p in pieces:
    print(" ", p[:4], "...", "ratio 7 ok" if validate_lacunary(p, 7) else "not lacunary")
