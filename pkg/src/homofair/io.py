"""File formats: kernels, outcome vectors, embeddings and graph exports."""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .graph import Graph, assortativity
from .inequality import Kernel

MAGIC = b"HFK1"


def write_kernel_csv(kernel: Kernel, path) -> None:
    """Dense CSV: a header line holding ``n``, then ``n`` rows."""
    K = np.asarray(kernel)
    with open(path, "w", newline="") as fh:
        fh.write(f"{K.shape[0]}\n")
        np.savetxt(fh, K, delimiter=",", fmt="%.17g")


def read_kernel_csv(path) -> Kernel:
    with open(path) as fh:
        n = int(fh.readline().strip())
        K = np.loadtxt(fh, delimiter=",", ndmin=2)
    if K.shape != (n, n):
        raise ValueError(f"{path}: header says n={n} but matrix is {K.shape}")
    return Kernel.from_matrix(K)


def write_kernel_binary(kernel: Kernel, path) -> None:
    """``HFK1`` magic, little-endian u64 ``n``, then row-major f64 entries."""
    K = np.ascontiguousarray(np.asarray(kernel), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", K.shape[0]))
        fh.write(K.tobytes(order="C"))


def read_kernel_binary(path) -> Kernel:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not an HFK1 kernel file")
    (n,) = struct.unpack("<Q", data[4:12])
    body = data[12:]
    if len(body) != 8 * n * n:
        raise ValueError(f"{path}: expected {8 * n * n} payload bytes, found {len(body)}")
    return Kernel.from_matrix(np.frombuffer(body, dtype="<f8").reshape(n, n))


def write_vector(values, path) -> None:
    np.savetxt(path, np.asarray(values, dtype=float).reshape(-1, 1), fmt="%.17g")


def read_vector(path) -> np.ndarray:
    return np.loadtxt(path, ndmin=1)


def write_embedding(embedding, path, config: dict | None = None) -> Path:
    """CSV of ``n`` rows by ``d`` columns plus a ``.json`` sidecar with the
    eigenvalues and configuration. Returns the sidecar path."""
    path = Path(path)
    np.savetxt(path, embedding.Z, delimiter=",", fmt="%.17g")
    side = path.with_suffix(".json")
    side.write_text(json.dumps({
        "n": int(embedding.Z.shape[0]),
        "dim": int(embedding.dim),
        "eigenvalues": [float(v) for v in embedding.eigenvalues],
        "config": config or {},
    }, indent=2))
    return side


def graph_manifest(graph: Graph) -> dict:
    out = {"n": graph.n, "edges": graph.num_edges}
    if graph.labels is not None:
        out["group_sizes"] = {str(k): v for k, v in graph.group_sizes().items()}
        try:
            out["assortativity"] = assortativity(graph)
        except ValueError:
            out["assortativity"] = None
    return out


def export_graph(graph: Graph, prefix) -> dict:
    """Write ``<prefix>.edges`` (``u v weight``, original ids), ``<prefix>.labels.csv``
    when labeled, and a ``<prefix>.json`` manifest. Returns the manifest."""
    prefix = Path(prefix)
    ids = graph.node_ids
    with open(f"{prefix}.edges", "w") as fh:
        for (u, v), w in zip(graph.edges, graph.weights):
            fh.write(f"{ids[u]} {ids[v]} {w:.17g}\n")
    if graph.labels is not None:
        names = graph.label_names
        with open(f"{prefix}.labels.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["node_id", "label"])
            for i, g in enumerate(graph.labels):
                if g >= 0:
                    wr.writerow([ids[i], names[g] if names else int(g)])
    manifest = graph_manifest(graph)
    Path(f"{prefix}.json").write_text(json.dumps(manifest, indent=2))
    return manifest
