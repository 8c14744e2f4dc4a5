"""Independent-cascade information access and greedy seed selection.

Activation probabilities use the live-edge formulation: each edge is kept
independently with the transmission probability and a node is informed in a
sample iff it is connected to a seed in the kept subgraph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .graph import Graph
from .inequality import DEFAULT, EntropyConfig, Kernel, as_kernel, partition_between

__all__ = [
    "ActivationEstimate",
    "CascadeConfig",
    "OBJECTIVES",
    "Objective",
    "estimate_activation",
    "evaluate_seeds",
    "exact_activation",
    "greedy_select",
    "objective_value",
]

OBJECTIVES = ("group_free", "individual", "community_maximin", "community_welfare", "reach")
_NEEDS_KERNEL = {"group_free", "community_maximin", "community_welfare"}
EXACT_MAX_EDGES = 20


@dataclass(frozen=True)
class CascadeConfig:
    transmission_p: float = 0.1
    num_samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.transmission_p <= 1:
            raise ValueError("transmission_p must lie in (0, 1]")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")


@dataclass(frozen=True, eq=False)
class ActivationEstimate:
    probs: np.ndarray
    stderr: np.ndarray
    samples: int


@dataclass(frozen=True, eq=False)
class Objective:
    """What greedy selection maximises given activation probabilities ``p``.

    ``group_free`` / ``community_maximin``: min of ``A(K, p)``;
    ``individual``: min of ``p``; ``community_welfare``: sum of
    ``A(K, sqrt(p))``; ``reach``: sum of ``p``.
    """

    kind: str
    kernel: Kernel | None = None

    def __post_init__(self):
        if self.kind not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.kind!r}; choose from {OBJECTIVES}")
        if self.kind in _NEEDS_KERNEL:
            if self.kernel is None:
                raise ValueError(f"objective {self.kind!r} needs a kernel")
            object.__setattr__(self, "kernel", as_kernel(self.kernel))


class _LiveEdgeBatch:
    """Connected-component labels of ``T`` independent live-edge samples.

    ``comp[t, v]`` is a component id unique across the whole batch.
    """

    def __init__(self, graph: Graph, p: float, samples: int, rng: np.random.Generator):
        n, T = graph.n, samples
        keep = rng.random((T, graph.num_edges)) < p
        t_idx, e_idx = np.nonzero(keep)
        u = graph.edges[e_idx, 0] + t_idx * n
        v = graph.edges[e_idx, 1] + t_idx * n
        big = sp.coo_matrix((np.ones(len(u)), (u, v)), shape=(n * T, n * T))
        ncomp, labels = connected_components(big, directed=False)
        self.n, self.T, self.ncomp = n, T, ncomp
        self.comp = labels.reshape(T, n)

    def reached(self, seeds) -> np.ndarray:
        hit = np.zeros(self.ncomp, dtype=bool)
        seeds = np.asarray(list(seeds), dtype=np.int64)
        if len(seeds):
            hit[self.comp[:, seeds].ravel()] = True
        return hit

    def counts(self, seeds) -> np.ndarray:
        """Per node, the number of samples in which it is informed."""
        return self.reached(seeds)[self.comp].sum(axis=0)

    def marginal_counts(self, seeds) -> np.ndarray:
        """``M[s, v]``: samples where adding ``s`` newly informs ``v``."""
        hit = self.reached(seeds)
        flat = self.comp.ravel()
        rows = np.tile(np.arange(self.n), self.T)
        live = ~hit[flat]
        B = sp.csr_matrix((np.ones(live.sum()), (rows[live], flat[live])),
                          shape=(self.n, self.ncomp))
        return (B @ B.T).toarray()


def _batch_rng(seed, iteration=None):
    key = [int(seed)] if iteration is None else [int(seed), int(iteration)]
    return np.random.default_rng(key)


def _check_seeds(graph, seeds):
    seeds = list(dict.fromkeys(int(s) for s in seeds))
    if not seeds:
        raise ValueError("seed set is empty")
    if min(seeds) < 0 or max(seeds) >= graph.n:
        raise ValueError("seed outside 0..n-1")
    return seeds


def estimate_activation(graph: Graph, seeds, cfg: CascadeConfig) -> ActivationEstimate:
    """Monte Carlo activation probabilities with binomial standard errors.

    The standard error uses the plus-four (Agresti-Coull) proportion, so a
    node reached in none or all of the samples still gets a nonzero error.
    Seeds are active by construction and get zero.
    """
    seeds = _check_seeds(graph, seeds)
    T = cfg.num_samples
    batch = _LiveEdgeBatch(graph, cfg.transmission_p, T, _batch_rng(cfg.seed))
    hits = batch.counts(seeds)
    p = hits / T
    p[seeds] = 1.0
    adj = (hits + 2.0) / (T + 4.0)
    stderr = np.sqrt(adj * (1.0 - adj) / (T + 4.0))
    stderr[seeds] = 0.0
    return ActivationEstimate(probs=p, stderr=stderr, samples=cfg.num_samples)


def exact_activation(graph: Graph, seeds, transmission_p: float) -> np.ndarray:
    """Exact activation probabilities by enumerating all live-edge subgraphs."""
    seeds = _check_seeds(graph, seeds)
    E = graph.num_edges
    if E > EXACT_MAX_EDGES:
        raise ValueError(f"{E} edges is too many to enumerate (max {EXACT_MAX_EDGES})")
    masks = np.arange(2**E, dtype=np.int64)
    live = ((masks[:, None] >> np.arange(E)) & 1).astype(bool)
    k = live.sum(axis=1)
    prob = transmission_p**k * (1.0 - transmission_p) ** (E - k)
    informed = np.zeros((len(masks), graph.n), dtype=bool)
    informed[:, seeds] = True
    u, v = graph.edges[:, 0], graph.edges[:, 1]
    while True:
        before = informed.sum()
        for e in range(E):
            spread = live[:, e] & (informed[:, u[e]] | informed[:, v[e]])
            informed[:, u[e]] |= spread
            informed[:, v[e]] |= spread
        if informed.sum() == before:
            break
    return prob @ informed


def objective_value(objective: Objective, p) -> np.ndarray:
    """Objective for one probability vector, or row-wise for a 2-D array."""
    p = np.asarray(p, dtype=float)
    kind = objective.kind
    if kind == "reach":
        return p.sum(axis=-1)
    if kind == "individual":
        return p.min(axis=-1)
    K = objective.kernel.matrix
    r = K.sum(axis=1)
    if kind == "community_welfare":
        return (np.sqrt(p) @ K.T / r).sum(axis=-1)
    return (p @ K.T / r).min(axis=-1)


def greedy_select(graph: Graph, budget: int, objective: Objective,
                  cfg: CascadeConfig) -> list[int]:
    """Add, one at a time, the node maximising the objective.

    Every iteration draws a fresh batch of live-edge samples (seeded from
    ``cfg.seed`` and the iteration index) and scores all candidates on that
    same batch. Exact ties go to the smallest node id.
    """
    if not 1 <= budget <= graph.n:
        raise ValueError(f"budget must lie in 1..{graph.n}")
    seeds: list[int] = []
    T = cfg.num_samples
    for it in range(budget):
        batch = _LiveEdgeBatch(graph, cfg.transmission_p, T, _batch_rng(cfg.seed, it))
        base = batch.counts(seeds) if seeds else np.zeros(graph.n, dtype=np.int64)
        cand = (base[None, :] + batch.marginal_counts(seeds)) / T
        scores = objective_value(objective, cand)
        scores[seeds] = -np.inf
        seeds.append(int(np.argmax(scores)))
    return seeds


def evaluate_seeds(graph: Graph, seeds, labels, cfg: CascadeConfig,
                   entropy: EntropyConfig = DEFAULT, objective: Objective | None = None):
    """Ground-truth inequality and expected reach for every prefix of ``seeds``.

    All prefixes share one sample batch, so reach is monotone in the prefix.
    """
    seeds = [int(s) for s in seeds]
    batch = _LiveEdgeBatch(graph, cfg.transmission_p, cfg.num_samples, _batch_rng(cfg.seed))
    rows = []
    for k in range(1, len(seeds) + 1):
        p = batch.counts(seeds[:k]) / cfg.num_samples
        p[seeds[:k]] = 1.0
        row = {
            "budget": k,
            "seed_node": seeds[k - 1],
            "delta0": partition_between(labels, p, entropy, allow_zeros=True),
            "reach": float(p.sum()),
        }
        if objective is not None:
            row["objective_value"] = float(objective_value(objective, p))
        rows.append(row)
    return rows
