"""Recommending items to two groups with different tastes.

Each group prefers its own half of the catalogue, so the utility-optimal
ranking shows the groups different items. Penalizing exposure dispersion
with beta trades some utility for balanced exposure. The network kernel
behaves like something between knowing the groups and treating every user
as their own group.
"""

import numpy as np

from homofair import (Kernel, PositionWeights, SBMParams, ground_truth_kernel, laplacian_kernel,
                      sbm_sample, tradeoff_sweep)

rng = np.random.default_rng(0)
g = sbm_sample(SBMParams.homophilous([30, 30], 0.3, 0.03, seed=0))
m = 40
favoured = (g.labels[:, None] == 0) == (np.arange(m)[None, :] < m // 2)
rho = np.clip(0.2 + 0.4 * rng.random((g.n, m)) + 0.3 * favoured, 0, 1)
kernels = {"ground_truth": ground_truth_kernel(g.labels),
           "laplacian": laplacian_kernel(g, 2),
           "identity": Kernel.from_matrix(np.eye(g.n))}
rows = tradeoff_sweep(rho, kernels, g.labels, [0, 0.3, 1, 3, 10], PositionWeights.dcg(m, 10),
                      iters=150)
print(f"{'kernel':13s} {'beta':>5s} {'utility':>8s} {'unfairness':>10s}")
for r in rows:
    print(f"{r['kernel']:13s} {r['beta']:5.1f} {r['avg_utility']:8.4f} {r['gt_unfairness']:10.4f}")
