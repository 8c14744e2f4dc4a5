"""Similarity kernels inferred from network topology."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graph import Graph, GraphError, louvain
from .inequality import Kernel, KernelError, ground_truth_kernel

__all__ = [
    "Embedding",
    "KernelConfig",
    "community_kernel",
    "cosine_kernel",
    "laplacian_eigenmaps",
    "laplacian_kernel",
    "make_kernel",
    "normalized_laplacian",
]

KERNEL_KINDS = ("laplacian", "ground_truth", "identity", "louvain")


@dataclass(frozen=True)
class KernelConfig:
    dim: int = 2
    zero_tol: float = 1e-8
    similarity: str = "cosine"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.similarity != "cosine":
            raise ValueError(f"unsupported similarity {self.similarity!r}")


@dataclass(frozen=True, eq=False)
class Embedding:
    Z: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.Z.shape[1]


def normalized_laplacian(graph: Graph) -> np.ndarray:
    """Dense ``I - D^-1/2 A D^-1/2`` (weighted degrees)."""
    a = graph.dense_adjacency()
    deg = a.sum(axis=1)
    if np.any(deg <= 0):
        isolated = np.flatnonzero(deg <= 0)
        raise GraphError(f"graph has {len(isolated)} isolated node(s), e.g. {isolated[:5].tolist()}")
    s = 1.0 / np.sqrt(deg)
    lap = -(s[:, None] * a * s[None, :])
    lap[np.diag_indices_from(lap)] += 1.0
    return lap


def laplacian_eigenmaps(graph: Graph, cfg: KernelConfig) -> Embedding:
    """Eigenvectors of the normalized Laplacian for the ``cfg.dim`` smallest
    eigenvalues above ``cfg.zero_tol``.

    Each column is sign-fixed so its largest-magnitude entry is positive.
    """
    lap = normalized_laplacian(graph)
    vals, vecs = np.linalg.eigh(lap)
    nonzero = np.flatnonzero(vals > cfg.zero_tol)
    if cfg.dim > len(nonzero):
        ncomp, _ = connected_components(graph.adjacency, directed=False)
        raise GraphError(
            f"dim={cfg.dim} exceeds the {len(nonzero)} available non-zero eigenvalues "
            f"(n={graph.n}, {ncomp} connected component(s))")
    idx = nonzero[: cfg.dim]
    Z = vecs[:, idx].copy()
    pivot = np.argmax(np.abs(Z), axis=0)
    signs = np.sign(Z[pivot, np.arange(Z.shape[1])])
    Z *= signs
    return Embedding(Z=Z, eigenvalues=vals[idx].copy())


def cosine_kernel(embedding: Embedding | np.ndarray) -> Kernel:
    """Min-max scaled cosine similarity, columns rescaled to sum to ``n``."""
    Z = embedding.Z if isinstance(embedding, Embedding) else np.asarray(embedding, dtype=float)
    norms = np.linalg.norm(Z, axis=1)
    if np.any(norms <= 0):
        raise KernelError("embedding has a zero-norm row; cosine similarity undefined")
    U = Z / norms[:, None]
    S = U @ U.T
    lo, hi = S.min(), S.max()
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        raise KernelError("cosine similarity is constant; min-max scaling undefined")
    Su = (S - lo) / (hi - lo)
    n = Z.shape[0]
    K = n * Su / Su.sum(axis=0)[None, :]
    return Kernel.from_matrix(K)


def community_kernel(partition) -> Kernel:
    """Block kernel of a detected partition (same form as the ground-truth one)."""
    return ground_truth_kernel(partition)


def laplacian_kernel(graph: Graph, dim: int, zero_tol: float = 1e-8) -> Kernel:
    """Shorthand: Laplacian eigenmaps followed by the cosine kernel."""
    return cosine_kernel(laplacian_eigenmaps(graph, KernelConfig(dim=dim, zero_tol=zero_tol)))


def make_kernel(kind: str, graph: Graph, dim: int = 2, resolution: float = 1.0,
                seed: int = 0) -> Kernel:
    """Kernel of the given kind for ``graph``.

    ``ground_truth`` reads ``graph.labels``; the others use topology only.
    """
    if kind == "laplacian":
        return laplacian_kernel(graph, dim)
    if kind == "identity":
        return Kernel.from_matrix(np.eye(graph.n))
    if kind == "louvain":
        return community_kernel(louvain(graph, resolution=resolution, seed=seed))
    if kind == "ground_truth":
        if not graph.is_labeled:
            raise GraphError("ground_truth kernel needs every node labeled")
        return ground_truth_kernel(graph.labels)
    raise ValueError(f"unknown kernel kind {kind!r}; choose from {KERNEL_KINDS}")
