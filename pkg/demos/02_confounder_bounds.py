"""How much can an imperfect kernel distort the measured inequality?

A kernel that mixes the sensitive similarity (value p inside a group) with
unrelated confounders of total weight q can only move the measurement inside
a band around the true value. This prints the band for the three parameter
pairs also emitted by ``homofair bounds`` and checks one random kernel.
"""

import numpy as np

from homofair import NORMVAR, blend_inequality, group_free_inequality, prop2_bounds

for p, q in [(2.0, 1.0), (1.0, 1.0), (1.0, 2.0)]:
    print(f"p={p}, q={q}")
    for eps in (0.0, 0.1, 0.25, 0.5):
        lo, hi, d0 = prop2_bounds(p, q, eps)
        print(f"  eps={eps:.2f}: true {d0:.3f}, measured in [{lo:.3f}, {hi:.3f}]")

# a within/between blend shrinks inequality by ((p - q) / (p + q))^2
n, eps, p, q = 16, 0.25, 2.0, 0.5
labels = np.repeat([0, 1], n // 2)
y = np.r_[np.ones(6), np.zeros(2), np.ones(2), np.zeros(6)]
K = np.where(labels[:, None] == labels[None, :], p, q)
print("blend formula", blend_inequality(p, q, 4 * eps**2),
      "direct", group_free_inequality(K, y, NORMVAR, allow_zeros=True))
