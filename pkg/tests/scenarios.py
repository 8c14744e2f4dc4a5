"""Random instance generators shared by the unit and acceptance tests."""

import numpy as np

from homofair.graph import PreprocessConfig, SBMParams, preprocess, sbm_sample


def column_regular_kernel(rng, n, density=0.7, c=None):
    """Random nonnegative matrix whose columns all sum to ``c`` (random if None).

    Some entries are zeroed, but every row keeps positive mass.
    """
    k = rng.random((n, n)) * (rng.random((n, n)) < density)
    k[np.arange(n), rng.permutation(n)] += rng.random(n) + 0.1   # no empty row or column
    c = rng.uniform(0.5, 3.0) if c is None else c
    return c * k / k.sum(axis=0)[None, :]


def two_group_labels(rng, n, eps_index=None):
    """``n/2`` positives split between two equal groups as ``1/2 +- eps``.

    Returns ``(y, labels, eps)``.
    """
    h = n // 2
    k1 = int(rng.integers(h // 2, h + 1)) if eps_index is None else eps_index
    y = np.zeros(n)
    y[rng.permutation(h)[:k1]] = 1
    y[h + rng.permutation(h)[:h - k1]] = 1
    labels = np.repeat([0, 1], h)
    return y, labels, k1 / h - 0.5


def confounded_kernel(rng, n, p, q):
    """Sensitive block kernel with value ``p`` plus up to three confounders.

    Each confounder is a block kernel over a random permutation of equal-size
    blocks, so it is row- and column-regular; their total mass is scaled to at
    most ``q n**2 / 2``.
    """
    h = n // 2
    ks = np.zeros((n, n))
    ks[:h, :h] = p
    ks[h:, h:] = p
    divisors = [s for s in range(1, n + 1) if n % s == 0]
    kc = np.zeros((n, n))
    for _ in range(int(rng.integers(1, 4))):
        size = int(rng.choice(divisors))
        block = np.empty(n, dtype=int)
        block[rng.permutation(n)] = np.arange(n) // size
        kc += rng.uniform(0.1, 1.0) * (block[:, None] == block[None, :])
    kc *= rng.uniform(0.0, 1.0) * q * n * n / 2 / kc.sum()
    return ks + kc


def skewed_sbm(seed, sizes=(100, 100), p_in=(0.12, 0.03), p_out=0.005):
    """Two-block SBM where block 0 is four times denser, restricted to its
    largest connected component."""
    g = sbm_sample(SBMParams(sizes, p_in, p_out, seed=seed))
    return preprocess(g, PreprocessConfig())


def biased_preferences(rng, labels, m, bias=0.3):
    """Preferences in [0, 1] where group 0 favours the first half of the
    items and every other group the second half."""
    n = len(labels)
    favoured = (labels[:, None] == 0) == (np.arange(m)[None, :] < m // 2)
    return np.clip(0.2 + 0.4 * rng.random((n, m)) + bias * favoured, 0.0, 1.0)
