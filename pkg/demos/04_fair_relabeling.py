"""Post-processing a classifier that only ever says yes to one group.

The relabeling solver flips as few predictions as possible while making
every node's kernel-smoothed exposure to positive labels at least theta.
Raising theta spreads the positives across the network; the true-group
inequality falls even though the solver never sees the groups.
"""

import numpy as np

from homofair import SBMParams, laplacian_kernel, sbm_sample, solve_heuristic, theta_sweep

g = sbm_sample(SBMParams.homophilous([60, 60], 0.2, 0.02, seed=3))
K = laplacian_kernel(g, 2)
y_hat = (g.labels == 0).astype(int)
rows, _ = theta_sweep(y_hat, K, np.linspace(0, 0.5, 11), labels=g.labels,
                      solver=solve_heuristic)
print(" theta  flips  true-group inequality")
for r in rows:
    print(f" {r['theta']:.2f}   {r['flips']:4d}   {r['delta0']:.4f}")
if len(rows) < 11:
    print(f"no feasible relabeling beyond theta={rows[-1]['theta']:.2f}")
