"""Inequality indices over outcome vectors and similarity kernels.

Generalized entropy indices, their weighted form, the kernel averaging
operator ``A(K, y) = K y / K 1``, group-free between-group inequality and its
additive decomposition, the smoothed standard-deviation dispersion used for
ranking, and closed-form bounds for kernels mixing a sensitive attribute with
confounders.

Two index variants are exposed. ``generalized_entropy`` is the usual GE(alpha)
family; ``normalized_variance`` is ``var(x) / mean(x)**2``, i.e. twice GE(2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT",
    "EntropyConfig",
    "NORMVAR",
    "Kernel",
    "KernelError",
    "as_kernel",
    "blend_inequality",
    "decompose",
    "ge_index",
    "ge_weighted",
    "ground_truth_kernel",
    "group_free_inequality",
    "partition_between",
    "prop2_bounds",
    "smooth",
    "std_dispersion",
]

GENERALIZED_ENTROPY = "generalized_entropy"
NORMALIZED_VARIANCE = "normalized_variance"


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class EntropyConfig:
    alpha: float = 2.0
    variant: str = GENERALIZED_ENTROPY

    def __post_init__(self):
        if self.variant not in (GENERALIZED_ENTROPY, NORMALIZED_VARIANCE):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if self.variant == GENERALIZED_ENTROPY and self.alpha in (0, 1):
            raise ValueError("alpha in {0, 1} (Theil / MLD limits) is not supported")


DEFAULT = EntropyConfig()
NORMVAR = EntropyConfig(variant=NORMALIZED_VARIANCE)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Nonnegative n x n similarity matrix whose columns share one total."""

    matrix: np.ndarray
    column_sum: float

    @classmethod
    def from_matrix(cls, matrix, rtol: float = 1e-9) -> "Kernel":
        k = np.array(matrix, dtype=float)
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] == 0:
            raise KernelError(f"kernel must be a non-empty square matrix, got {k.shape}")
        if np.any(k < 0) or not np.all(np.isfinite(k)):
            raise KernelError("kernel entries must be finite and nonnegative")
        cols = k.sum(axis=0)
        c = float(cols.mean())
        if c <= 0 or np.max(np.abs(cols - c)) > rtol * c:
            raise KernelError(
                f"kernel columns must share one sum (spread {cols.min():.6g}..{cols.max():.6g})")
        k.setflags(write=False)
        return cls(k, c)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def as_kernel(k) -> Kernel:
    return k if isinstance(k, Kernel) else Kernel.from_matrix(k)


def _values(x, allow_zeros=False, alpha=2.0):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("outcome vector is empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("outcomes must be finite")
    if allow_zeros and alpha > 0:
        if np.any(x < 0) or x.sum() <= 0:
            raise ValueError("outcomes must be nonnegative with a positive mean")
    elif np.any(x <= 0):
        raise ValueError("entropy indices need strictly positive outcomes")
    return x


def ge_weighted(x, w, cfg: EntropyConfig = DEFAULT, allow_zeros: bool = False) -> float:
    """Weighted inequality index of ``x`` under weights ``w``.

    The mean is the ``w``-weighted mean. Zero weights are accepted as long as
    the total is positive; they simply drop the entry. ``allow_zeros`` admits
    zero outcomes, which are well defined for ``alpha > 0``.
    """
    x = _values(x, allow_zeros, cfg.alpha)
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape != x.shape:
        raise ValueError("weights and outcomes differ in length")
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be nonnegative with a positive total")
    p = w / w.sum()
    mu = p @ x
    if cfg.variant == NORMALIZED_VARIANCE:
        return float(p @ (x - mu) ** 2 / mu**2)
    a = cfg.alpha
    return float(p @ ((x / mu) ** a - 1.0) / (a * (a - 1.0)))


def ge_index(x, cfg: EntropyConfig = DEFAULT, allow_zeros: bool = False) -> float:
    """Inequality index of ``x``; zero iff ``x`` is constant."""
    x = _values(x, allow_zeros, cfg.alpha)
    return ge_weighted(x, np.ones_like(x), cfg, allow_zeros)


def smooth(kernel, y) -> np.ndarray:
    """Averaging operator: each entry is the kernel-weighted mean of ``y``."""
    k = kernel.matrix if isinstance(kernel, Kernel) else np.asarray(kernel, dtype=float)
    y = np.asarray(y, dtype=float)
    if k.shape[1] != y.shape[0]:
        raise ValueError(f"kernel is {k.shape}, outcomes have length {y.shape[0]}")
    r = k.sum(axis=1)
    if np.any(r <= 0):
        raise KernelError("kernel has a zero row; smoothing undefined there")
    return (k @ y) / (r if y.ndim == 1 else r[:, None])


def ground_truth_kernel(labels) -> Kernel:
    """Block kernel with ``1/|g|`` between members of the same group."""
    labels = np.asarray(labels).reshape(-1)
    if labels.size == 0:
        raise KernelError("empty partition")
    if np.any(labels < 0):
        raise KernelError("every node needs a group")
    _, dense, counts = np.unique(labels, return_inverse=True, return_counts=True)
    dense = dense.reshape(-1)
    same = dense[:, None] == dense[None, :]
    k = same / counts[dense][None, :]
    return Kernel.from_matrix(k)


def group_free_inequality(kernel, y, cfg: EntropyConfig = DEFAULT,
                          allow_zeros: bool = False) -> float:
    """Between-group inequality of ``y`` relative to ``kernel``.

    The index of the smoothed outcomes, weighted by the kernel row sums.
    """
    kernel = as_kernel(kernel)
    return ge_weighted(smooth(kernel, y), kernel.row_sums, cfg, allow_zeros)


def partition_between(labels, y, cfg: EntropyConfig = DEFAULT, allow_zeros=False) -> float:
    """Classical between-group term: the index of the group means, one entry
    per group, weighted by group size."""
    labels = np.asarray(labels).reshape(-1)
    y = np.asarray(y, dtype=float)
    groups, inv, counts = np.unique(labels, return_inverse=True, return_counts=True)
    means = np.bincount(inv.reshape(-1), weights=y) / counts
    return ge_weighted(means, counts, cfg, allow_zeros)


def decompose(kernel, y, cfg: EntropyConfig = DEFAULT) -> tuple[float, float]:
    """Split ``ge_index(y)`` into (within, between) terms for ``kernel``.

    Row ``i`` of the kernel weights the outcomes in the within term; the
    between term is :func:`group_free_inequality`. Requires equal column sums
    (checked by :class:`Kernel`).
    """
    kernel = as_kernel(kernel)
    y = _values(y)
    k, n = kernel.matrix, kernel.n
    r = kernel.row_sums
    a = smooth(kernel, y)
    mu = y.mean()
    if cfg.variant == NORMALIZED_VARIANCE:
        q, q_mu = a**2, mu**2
    else:
        q, q_mu = a**cfg.alpha, mu**cfg.alpha
    within_i = np.array([ge_weighted(y, k[i], cfg) if r[i] > 0 else 0.0 for i in range(n)])
    delta_w = float(np.sum(q * r * within_i) / (q_mu * kernel.column_sum * n))
    delta_b = ge_weighted(a, r, cfg)
    return delta_w, delta_b


def std_dispersion(y, eta: float, weights=None) -> float:
    """``sqrt(eta + sum_i w_i (y_i - ybar)**2)``.

    Unweighted, ``w_i = 1`` and ``ybar`` is the plain mean. Weights are
    rescaled to sum to ``len(y)`` (so uniform weights reproduce the
    unweighted value) and ``ybar`` is the weighted mean.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    y = np.asarray(y, dtype=float)
    if weights is None:
        w = np.ones_like(y)
    else:
        w = np.asarray(weights, dtype=float)
        w = w * (len(y) / w.sum())
    ybar = (w @ y) / w.sum()
    return float(np.sqrt(eta + w @ (y - ybar) ** 2))


def prop2_bounds(p_s: float, q_c: float, epsilon: float) -> tuple[float, float, float]:
    """Range of the kernel-based between-group inequality under confounders.

    Two equal sensitive groups with positive-label rates ``1/2 +- epsilon``,
    sensitive kernel value ``p_s`` and confounder mass parameter ``q_c``.
    Returns ``(lower, upper, delta0)`` for the normalized-variance index, where
    ``delta0 = 4 epsilon**2`` is the inequality under the true groups.
    """
    if not p_s > 0:
        raise ValueError("p_s must be positive")
    if q_c < 0:
        raise ValueError("q_c must be nonnegative")
    if not 0 <= epsilon <= 0.5:
        raise ValueError("epsilon must lie in [0, 1/2]")
    delta0 = 4.0 * epsilon**2
    lower = (p_s / (p_s + q_c)) ** 2 * delta0
    upper = delta0 + (q_c / (p_s + q_c)) ** 2 * (1.0 - delta0)
    return lower, upper, delta0


def blend_inequality(p: float, q: float, delta0: float) -> float:
    """Between-group inequality once every cross-group pair gets similarity
    ``q`` next to within-group similarity ``p`` (two equal groups)."""
    if not p > q >= 0:
        raise ValueError("need p > q >= 0")
    if delta0 < 0:
        raise ValueError("delta0 must be nonnegative")
    return ((p - q) / (p + q)) ** 2 * delta0
