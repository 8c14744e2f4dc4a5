"""Exposure-fair top-k ranking for users of a social network.

A stochastic ranking policy is represented by its exposure matrix
``e[i, j] = sum_k b_k P[i, j, k]``: every objective term depends on the policy
only through ``e``. Frank-Wolfe keeps ``e`` a convex mixture of top-k
rankings, so a concrete ranking can always be sampled from the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .inequality import as_kernel, ground_truth_kernel, smooth

__all__ = [
    "ExposurePolicy",
    "PositionWeights",
    "RankingObjectiveConfig",
    "als_complete",
    "frank_wolfe",
    "in_polytope",
    "lmo_topk",
    "objective",
    "objective_gradient",
    "sorted_policy",
    "tradeoff_sweep",
    "unfairness",
    "utility",
]


@dataclass(frozen=True, eq=False)
class PositionWeights:
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 1 or len(b) == 0:
            raise ValueError("position weights must be a non-empty vector")
        if np.any(b < 0) or np.any(np.diff(b) > 0):
            raise ValueError("position weights must be nonnegative and nonincreasing")
        object.__setattr__(self, "b", b)

    @classmethod
    def dcg(cls, m: int, k_bar: int) -> "PositionWeights":
        """``1 / log2(1 + k)`` on the first ``k_bar`` slots, zero after."""
        if not 1 <= k_bar <= m:
            raise ValueError("need 1 <= k_bar <= m")
        b = np.zeros(m)
        b[:k_bar] = 1.0 / np.log2(1.0 + np.arange(1, k_bar + 1))
        return cls(b)

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def k_bar(self) -> int:
        return int(np.count_nonzero(self.b))

    @property
    def total(self) -> float:
        return float(self.b.sum())


@dataclass(frozen=True)
class RankingObjectiveConfig:
    beta: float = 0.0
    eta: float = 0.1
    kernel_kind: str = "laplacian"

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.eta <= 0:
            raise ValueError("eta must be positive")


@dataclass(eq=False)
class ExposurePolicy:
    """Exposure matrix plus the Frank-Wolfe vertex mixture that produced it.

    ``vertices[t][i]`` lists the items user ``i`` sees in slots ``1..k_bar``
    under vertex ``t``; ``mixture[t]`` is that vertex's weight.
    """

    e: np.ndarray
    weights: PositionWeights
    vertices: list = field(default_factory=list)
    mixture: np.ndarray = field(default_factory=lambda: np.zeros(0))
    trace: list = field(default_factory=list)

    def ranking_distribution(self, user: int) -> list[tuple[float, tuple]]:
        """Distinct top-k rankings for ``user`` with their probabilities."""
        dist: dict[tuple, float] = {}
        for w, v in zip(self.mixture, self.vertices):
            if w > 0:
                key = tuple(int(j) for j in v[user])
                dist[key] = dist.get(key, 0.0) + float(w)
        return sorted(((w, k) for k, w in dist.items()), reverse=True)

    def sample_rankings(self, rng: np.random.Generator) -> np.ndarray:
        """One top-k ranking per user, drawn independently from the mixture."""
        p = self.mixture / self.mixture.sum()
        pick = rng.choice(len(self.vertices), size=self.e.shape[0], p=p)
        stack = np.stack(self.vertices)
        return stack[pick, np.arange(self.e.shape[0])]


# --------------------------------------------------------------------------
# objective pieces


def utility(e, rho) -> np.ndarray:
    """Per-user utility ``sum_j rho_ij e_ij``."""
    e, rho = np.asarray(e, dtype=float), np.asarray(rho, dtype=float)
    if e.shape != rho.shape:
        raise ValueError(f"exposure {e.shape} and preference {rho.shape} shapes differ")
    return np.einsum("ij,ij->i", rho, e)


def _dispersion_parts(e, kernel, eta):
    K = kernel.matrix
    r = K.sum(axis=1)
    n = K.shape[0]
    w = r * (n / r.sum())
    Y = smooth(kernel, e)                        # column j: smoothed exposures of item j
    ybar = (w @ Y) / w.sum()
    D = Y - ybar[None, :]
    F = np.sqrt(eta + w @ D**2)
    return K, r, w, D, F


def unfairness(e, kernel, eta: float = 0.1) -> float:
    """Mean over items of the kernel-smoothed exposure dispersion.

    Per item: :func:`~homofair.inequality.std_dispersion` of ``A(K, e_j)``
    with weights ``K 1``.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    kernel = as_kernel(kernel)
    *_, F = _dispersion_parts(np.asarray(e, dtype=float), kernel, eta)
    return float(F.mean())


def objective(e, rho, kernel, beta: float, eta: float = 0.1) -> float:
    return float(utility(e, rho).mean() - beta * unfairness(e, kernel, eta))


def objective_gradient(e, rho, kernel, beta: float, eta: float = 0.1) -> np.ndarray:
    kernel = as_kernel(kernel)
    e = np.asarray(e, dtype=float)
    n, m = e.shape
    grad = np.asarray(rho, dtype=float) / n
    if beta == 0:
        return grad
    K, r, w, D, F = _dispersion_parts(e, kernel, eta)
    # d F_j / d Y_ij = w_i D_ij / F_j; the weighted-mean term cancels
    dY = (w[:, None] * D) / F[None, :]
    return grad - (beta / m) * (K.T @ (dY / r[:, None]))


def _topk_items(scores, k_bar):
    return np.argsort(-np.asarray(scores, dtype=float), axis=-1, kind="stable")[..., :k_bar]


def _vertex_exposure(items, weights: PositionWeights):
    items = np.atleast_2d(items)
    e = np.zeros((items.shape[0], weights.m))
    e[np.arange(items.shape[0])[:, None], items] = weights.b[: items.shape[1]][None, :]
    return e


def lmo_topk(scores, weights: PositionWeights) -> np.ndarray:
    """Exposure row(s) maximising ``<scores, e>`` over the ranking polytope:
    the ``k_bar`` best-scoring items get ``b_1..b_kbar`` (ties to the smaller
    item id)."""
    scores = np.asarray(scores, dtype=float)
    if scores.shape[-1] != weights.m:
        raise ValueError("score length must equal the number of items")
    e = _vertex_exposure(_topk_items(scores, weights.k_bar), weights)
    return e[0] if scores.ndim == 1 else e


def sorted_policy(rho, weights: PositionWeights) -> ExposurePolicy:
    """Utility-optimal policy: each user's items sorted by preference."""
    items = _topk_items(rho, weights.k_bar)
    return ExposurePolicy(e=_vertex_exposure(items, weights), weights=weights,
                          vertices=[items], mixture=np.ones(1))


def in_polytope(e, weights: PositionWeights, tol: float = 1e-9) -> bool:
    """Rows sum to ``sum(b)`` and are weakly majorized by ``b``."""
    e = np.atleast_2d(np.asarray(e, dtype=float))
    if np.any(e < -tol):
        return False
    if np.any(np.abs(e.sum(axis=1) - weights.total) > tol):
        return False
    partial = np.cumsum(-np.sort(-e, axis=1), axis=1)
    return bool(np.all(partial <= np.cumsum(weights.b)[None, :] + tol))


def frank_wolfe(rho, kernel, cfg: RankingObjectiveConfig, weights: PositionWeights,
                iters: int = 200) -> ExposurePolicy:
    """Maximise ``mean utility - beta * unfairness`` over ranking policies.

    Starts from the sorted policy. Step ``t`` moves towards the per-user
    top-k of the gradient with step size ``2 / (t + 2)``, halved until the
    objective does not decrease (and skipped if it never stops decreasing),
    so the returned trace is monotone.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rho = np.asarray(rho, dtype=float)
    kernel = as_kernel(kernel)
    if rho.shape != (kernel.n, weights.m):
        raise ValueError(f"rho is {rho.shape}, expected {(kernel.n, weights.m)}")
    beta, eta = cfg.beta, cfg.eta

    def f(e):
        return objective(e, rho, kernel, beta, eta)

    pol = sorted_policy(rho, weights)
    e = pol.e
    vertices, mix = list(pol.vertices), [1.0]
    trace = [f(e)]
    for t in range(iters):
        items = _topk_items(objective_gradient(e, rho, kernel, beta, eta), weights.k_bar)
        d = _vertex_exposure(items, weights) - e
        gamma = 2.0 / (t + 2.0)
        cur = trace[-1]
        while gamma > 1e-12 and f(e + gamma * d) < cur:
            gamma /= 2.0
        if gamma <= 1e-12:
            trace.append(cur)
            continue
        e = e + gamma * d
        trace.append(f(e))
        mix = [w * (1.0 - gamma) for w in mix]
        for k, v in enumerate(vertices):
            if np.array_equal(v, items):
                mix[k] += gamma
                break
        else:
            vertices.append(items)
            mix.append(gamma)
    return ExposurePolicy(e=e, weights=weights, vertices=vertices,
                          mixture=np.asarray(mix), trace=trace)


# --------------------------------------------------------------------------
# preference completion and experiment sweep


def als_complete(ratings, rank: int = 32, iterations: int = 15, reg: float = 0.1,
                 seed: int = 0) -> np.ndarray:
    """Fill a user x item interaction matrix with alternating ridge regression.

    ``ratings`` (dense or scipy sparse, counts) is binarized; the result is
    ``clip(U V^T, 0, 1)``.
    """
    R = ratings.toarray() if sp.issparse(ratings) else np.asarray(ratings, dtype=float)
    if R.ndim != 2 or R.size == 0:
        raise ValueError("ratings must be a non-empty 2-D matrix")
    R = (R > 0).astype(float)
    if not R.any():
        raise ValueError("ratings contain no interactions")
    empty = np.flatnonzero(R.sum(axis=1) == 0)
    if len(empty):
        raise ValueError(f"{len(empty)} user(s) have no ratings, e.g. user {empty[0]}")
    n, m = R.shape
    rank = min(rank, n, m)
    rng = np.random.default_rng(seed)
    V = rng.normal(scale=0.1, size=(m, rank))
    eye = np.eye(rank)
    for _ in range(iterations):
        U = np.linalg.solve(V.T @ V + reg * eye, V.T @ R.T).T
        V = np.linalg.solve(U.T @ U + reg * eye, U.T @ R).T
    return np.clip(U @ V.T, 0.0, 1.0)


def tradeoff_sweep(rho, kernels: dict, labels, betas, weights: PositionWeights,
                   eta: float = 0.1, iters: int = 200) -> list[dict]:
    """Utility / ground-truth unfairness for each kernel and each beta.

    ``kernels`` maps a name (e.g. ``"laplacian"``) to a :class:`Kernel`.
    """
    gt = ground_truth_kernel(labels)
    rows = []
    for name, kernel in kernels.items():
        for beta in betas:
            cfg = RankingObjectiveConfig(beta=float(beta), eta=eta, kernel_kind=name)
            pol = frank_wolfe(rho, kernel, cfg, weights, iters=iters)
            rows.append({
                "beta": float(beta),
                "kernel": name,
                "avg_utility": float(utility(pol.e, rho).mean()),
                "gt_unfairness": unfairness(pol.e, gt, eta),
                "iterations": iters,
            })
    return rows
