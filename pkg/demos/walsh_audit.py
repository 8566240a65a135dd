"""Exact discrete Sidon audit on random Walsh trials, plus a Sylvester
tower read back as a Walsh prefix.

Run: python demos/walsh_audit.py
"""
import numpy as np

from sidonkit.hadamard import sylvester, system_from_tower
from sidonkit.walsh import random_walsh_trial, walsh_sidon_check, walsh_system

rng = np.random.Generator(np.random.Philox(7))
worst = None
for _ in range(200):
    n, p = random_walsh_trial(rng, 2, 6)
    rep = walsh_sidon_check(2, n, p)
    assert rep.holds
    if rep.ratio is not None and (worst is None or rep.ratio < worst):
        worst = rep.ratio
print(f"200 trials, l = 2, m = 6: all hold, smallest sup / sum ||p_k||_1 = {float(worst):.4f}")

tower = [sylvester(k) for k in range(0, 6)]
sysm = system_from_tower(tower)
same = all(a == b for a, b in zip(sysm.functions, walsh_system(32).functions))
print("Sylvester tower equals the first 32 Walsh functions:", same)
