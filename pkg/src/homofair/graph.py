"""Graph container, dataset ingestion, preprocessing, assortativity, SBM
sampling and Louvain community detection."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field, replace
from functools import cached_property

import networkx as nx
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Graph",
    "GraphError",
    "ParseError",
    "PreprocessConfig",
    "SBMParams",
    "assortativity",
    "load_edge_list",
    "load_labels",
    "load_node_values",
    "louvain",
    "preprocess",
    "read_ratings",
    "sbm_sample",
]


class GraphError(ValueError):
    pass


class ParseError(GraphError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph on dense node ids ``0..n-1``.

    ``edges`` holds each undirected edge once as ``(u, v)`` with ``u < v``.
    ``labels`` uses ``-1`` for unlabeled nodes; ``label_names[g]`` is the
    original label of group ``g``. ``node_ids[i]`` is the id node ``i`` had in
    the source file (or ``i`` itself for generated graphs).
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    labels: np.ndarray | None = None
    node_ids: tuple = ()
    label_names: tuple | None = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(edges) != len(weights):
            raise GraphError("edges and weights differ in length")
        if len(edges):
            if edges.min() < 0 or edges.max() >= self.n:
                raise GraphError("edge endpoint outside 0..n-1")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise GraphError("self-loops are not allowed")
            if np.any(weights < 0):
                raise GraphError("edge weights must be nonnegative")
        edges = np.sort(edges, axis=1)
        edges.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        if not self.node_ids:
            object.__setattr__(self, "node_ids", tuple(range(self.n)))
        if len(self.node_ids) != self.n:
            raise GraphError("node_ids must have one entry per node")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64).copy()
            if labels.shape != (self.n,):
                raise GraphError("labels must have one entry per node")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_edges(cls, n, edges, weights=None, labels=None) -> "Graph":
        """Build a graph from an iterable of pairs, summing duplicate edges."""
        edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                           dtype=np.int64).reshape(-1, 2)
        if weights is None:
            weights = np.ones(len(edges))
        weights = np.asarray(weights, dtype=float)
        keep = edges[:, 0] != edges[:, 1]
        edges, weights = np.sort(edges[keep], axis=1), weights[keep]
        uniq, inv = np.unique(edges, axis=0, return_inverse=True)
        summed = np.bincount(inv.reshape(-1), weights=weights, minlength=len(uniq))
        return cls(n=n, edges=uniq, weights=summed, labels=labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        u, v = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.concatenate([self.weights, self.weights])
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def dense_adjacency(self) -> np.ndarray:
        return self.adjacency.toarray()

    @cached_property
    def degrees(self) -> np.ndarray:
        """Unweighted degree (number of neighbours)."""
        return np.bincount(self.edges.reshape(-1), minlength=self.n)

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None and bool(np.all(self.labels >= 0))

    @property
    def num_groups(self) -> int:
        if self.labels is None:
            return 0
        return len(np.unique(self.labels[self.labels >= 0]))

    def group_sizes(self) -> dict:
        if self.labels is None:
            return {}
        groups, counts = np.unique(self.labels[self.labels >= 0], return_counts=True)
        names = self.label_names
        return {(names[g] if names else int(g)): int(c) for g, c in zip(groups, counts)}

    def with_labels(self, labels, label_names=None) -> "Graph":
        return replace(self, labels=labels, label_names=label_names)

    def subgraph(self, nodes) -> "Graph":
        """Induced subgraph on ``nodes`` with ids re-densified in sorted order.

        Group ids are re-densified too, so ``num_groups`` stays meaningful.
        """
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        e = remap[self.edges]
        keep = (e >= 0).all(axis=1)
        labels, names = None, self.label_names
        if self.labels is not None:
            old = self.labels[nodes]
            present = np.unique(old[old >= 0])
            gmap = np.full(max(int(self.labels.max(initial=-1)) + 1, 1), -1)
            gmap[present] = np.arange(len(present))
            labels = np.where(old >= 0, gmap[np.maximum(old, 0)], -1)
            if names is not None:
                names = tuple(names[g] for g in present)
        return Graph(
            n=len(nodes),
            edges=e[keep],
            weights=self.weights[keep],
            labels=labels,
            node_ids=tuple(self.node_ids[i] for i in nodes),
            label_names=names,
        )

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(
            (int(u), int(v), float(w)) for (u, v), w in zip(self.edges, self.weights))
        return g

    def __repr__(self):
        groups = f", groups={self.num_groups}" if self.labels is not None else ""
        return f"Graph(n={self.n}, edges={self.num_edges}{groups})"


# --------------------------------------------------------------------------
# ingestion

_SPLIT = {"comma": re.compile(r"\s*,\s*"), "tab": re.compile(r"\t"),
          "space": re.compile(r"\s+")}


def _sniff_delimiter(lines):
    sample = [ln for ln in lines[:50]]
    if sample and all("," in ln for ln in sample):
        return _SPLIT["comma"]
    if sample and all("\t" in ln for ln in sample):
        return _SPLIT["tab"]
    return _SPLIT["space"]


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _content_lines(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            out.append((lineno, line))
    return out


_HEADER_NAMES = {"u", "v", "source", "target", "src", "dst", "from", "to", "node1", "node2",
                 "id1", "id2", "node_1", "node_2", "weight", "w"}


def _has_header(rows) -> bool:
    # A header is a first row whose tokens don't look like the body's: body
    # ids numeric but first-row ids not, a non-numeric weight column, or the
    # usual column names when ids are strings anyway.
    if len(rows) < 1:
        return False
    first = rows[0]
    if all(tok.lower() in _HEADER_NAMES for tok in first[:3]):
        return True
    if len(first) >= 3 and not _is_number(first[2]):
        return True
    body = rows[1:]
    if body and all(_is_number(r[0]) and _is_number(r[1]) for r in body if len(r) >= 2):
        return not (_is_number(first[0]) and _is_number(first[1]))
    return False


def load_edge_list(path, directed_as_undirected: bool = False) -> Graph:
    """Read ``u<sep>v[<sep>weight]`` lines into a :class:`Graph`.

    The separator (comma, tab or whitespace) is detected from the file, and a
    header row is skipped when present. Node ids may be arbitrary tokens; they
    are mapped to dense ids in order of first appearance and kept in
    ``Graph.node_ids``.

    Duplicate edges are collapsed with their weights summed. With
    ``directed_as_undirected`` the lines are arcs: ``u->v`` and ``v->u`` merge
    into a single edge whose weight is the larger of the two arc weights, so
    reciprocated links are not counted twice. Self-loops are dropped.
    """
    lines = _content_lines(path)
    if not lines:
        raise GraphError(f"{path}: empty edge list")
    splitter = _sniff_delimiter([ln for _, ln in lines])
    rows = [splitter.split(ln) for _, ln in lines]
    start = 1 if _has_header(rows) else 0

    ids: dict[str, int] = {}
    src, dst, wts = [], [], []
    for (lineno, _), toks in zip(lines[start:], rows[start:]):
        if len(toks) < 2 or len(toks) > 3 or not toks[0] or not toks[1]:
            raise ParseError(path, lineno, f"expected 'u v [weight]', got {len(toks)} fields")
        w = 1.0
        if len(toks) == 3:
            try:
                w = float(toks[2])
            except ValueError:
                raise ParseError(path, lineno, f"bad weight {toks[2]!r}") from None
            if not np.isfinite(w) or w < 0:
                raise ParseError(path, lineno, f"weight must be finite and >= 0, got {w}")
        u = ids.setdefault(toks[0], len(ids))
        v = ids.setdefault(toks[1], len(ids))
        if u == v:
            continue
        src.append(u)
        dst.append(v)
        wts.append(w)
    if not src:
        raise GraphError(f"{path}: no edges after parsing")

    arcs = np.column_stack([src, dst]).astype(np.int64)
    wts = np.asarray(wts)
    if directed_as_undirected:
        uniq, inv = np.unique(arcs, axis=0, return_inverse=True)
        per_arc = np.bincount(inv.reshape(-1), weights=wts, minlength=len(uniq))
        und = np.sort(uniq, axis=1)
        pairs, inv2 = np.unique(und, axis=0, return_inverse=True)
        weights = np.zeros(len(pairs))
        np.maximum.at(weights, inv2.reshape(-1), per_arc)
        edges = pairs
    else:
        und = np.sort(arcs, axis=1)
        edges, inv = np.unique(und, axis=0, return_inverse=True)
        weights = np.bincount(inv.reshape(-1), weights=wts, minlength=len(edges))
    node_ids = tuple(_coerce_id(k) for k in ids)
    return Graph(n=len(ids), edges=edges, weights=weights, node_ids=node_ids)


def _coerce_id(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def _read_two_columns(path):
    lines = _content_lines(path)
    if not lines:
        raise GraphError(f"{path}: empty file")
    splitter = _sniff_delimiter([ln for _, ln in lines])
    rows = [(lineno, splitter.split(ln)) for lineno, ln in lines]
    for lineno, toks in rows:
        if len(toks) < 2:
            raise ParseError(path, lineno, "expected at least two columns")
    return rows


def load_labels(path, graph: Graph) -> Graph:
    """Attach ``node_id,label`` labels to ``graph``.

    Labels are categorical: integer or string tokens. They are mapped to dense
    group ids in sorted order; nodes absent from the file get ``-1``.
    """
    rows = _read_two_columns(path)
    index = {str(k): i for i, k in enumerate(graph.node_ids)}
    first_id = rows[0][1][0]
    if first_id not in index and len(rows) > 1:
        rows = rows[1:]  # header
    raw: dict[int, str] = {}
    for lineno, toks in rows:
        node, label = toks[0], toks[1]
        if node not in index:
            raise GraphError(f"{path}:{lineno}: unknown node id {node!r}")
        if _is_number(label) and not float(label).is_integer():
            raise GraphError(f"{path}:{lineno}: label {label!r} is not categorical")
        raw[index[node]] = label

    def key(s):
        return (0, int(float(s)), "") if _is_number(s) else (1, 0, s)

    names = sorted(set(raw.values()), key=key)
    gid = {name: g for g, name in enumerate(names)}
    labels = np.full(graph.n, -1, dtype=np.int64)
    for i, lab in raw.items():
        labels[i] = gid[lab]
    return graph.with_labels(labels, tuple(_coerce_id(s) for s in names))


def load_node_values(path, graph: Graph) -> np.ndarray:
    """Read a ``node_id,value`` file into a float vector aligned with ``graph``.

    Every node must appear; ids outside the graph are ignored so that a file
    written before preprocessing still applies.
    """
    rows = _read_two_columns(path)
    index = {str(k): i for i, k in enumerate(graph.node_ids)}
    if not _is_number(rows[0][1][1]):
        rows = rows[1:]
    out = np.full(graph.n, np.nan)
    for lineno, toks in rows:
        if not _is_number(toks[1]):
            raise ParseError(path, lineno, f"bad value {toks[1]!r}")
        i = index.get(toks[0])
        if i is not None:
            out[i] = float(toks[1])
    missing = np.flatnonzero(np.isnan(out))
    if len(missing):
        raise GraphError(f"{path}: no value for {len(missing)} node(s), "
                         f"e.g. {graph.node_ids[missing[0]]!r}")
    return out


def read_ratings(path):
    """Read a ``user_id,item_id,count`` file into (users, items, counts) lists
    of raw tokens; a header row is skipped."""
    users, items, counts = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 3:
                raise ParseError(path, lineno, "expected user_id,item_id,count")
            if not _is_number(row[2]):
                if lineno == 1:
                    continue
                raise ParseError(path, lineno, f"bad count {row[2]!r}")
            users.append(_coerce_id(row[0].strip()))
            items.append(_coerce_id(row[1].strip()))
            counts.append(float(row[2]))
    if not users:
        raise GraphError(f"{path}: no ratings")
    return users, items, np.asarray(counts)


# --------------------------------------------------------------------------
# preprocessing


@dataclass(frozen=True)
class PreprocessConfig:
    """Filter thresholds; zero disables a filter.

    ``repeat_until_stable`` re-runs the whole filter chain until no node is
    removed. The default single pass can leave nodes whose degree dropped
    below ``min_degree`` after the group filter.
    """

    min_degree: int = 0
    min_group_size: int = 0
    min_ratings: int = 0
    take_largest_cc: bool = True
    repeat_until_stable: bool = False

    def __post_init__(self):
        for name in ("min_degree", "min_group_size", "min_ratings"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def _largest_cc(graph: Graph) -> np.ndarray:
    _, comp = connected_components(graph.adjacency, directed=False)
    sizes = np.bincount(comp)
    return np.flatnonzero(comp == np.argmax(sizes))


def _preprocess_once(graph, cfg, ratings):
    g = graph
    if ratings is not None and cfg.min_ratings > 0:
        g = g.subgraph(np.flatnonzero(ratings >= cfg.min_ratings))
        ratings = ratings[np.asarray(ratings >= cfg.min_ratings)]
    if cfg.min_degree > 0:
        keep = np.flatnonzero(g.degrees >= cfg.min_degree)
        ratings = None if ratings is None else ratings[keep]
        g = g.subgraph(keep)
    if cfg.min_group_size > 0 and g.labels is not None:
        labs = g.labels
        counts = np.bincount(labs[labs >= 0], minlength=1)
        big = (labs >= 0) & (counts[np.maximum(labs, 0)] >= cfg.min_group_size)
        keep = np.flatnonzero(big)
        ratings = None if ratings is None else ratings[keep]
        g = g.subgraph(keep)
    if cfg.take_largest_cc and g.n > 0:
        keep = _largest_cc(g)
        ratings = None if ratings is None else ratings[keep]
        g = g.subgraph(keep)
    return g, ratings


def preprocess(graph: Graph, cfg: PreprocessConfig, ratings=None) -> Graph:
    """Apply ratings -> degree -> group-size -> largest-CC filters in order.

    ``ratings`` is an optional per-node count array aligned with ``graph``.
    """
    if ratings is not None:
        ratings = np.asarray(ratings)
        if ratings.shape != (graph.n,):
            raise GraphError("ratings must have one entry per node")
    g, r = _preprocess_once(graph, cfg, ratings)
    while cfg.repeat_until_stable and g.n > 0:
        g2, r = _preprocess_once(g, cfg, r)
        if g2.n == g.n:
            break
        g = g2
    if g.n == 0:
        raise GraphError("preprocessing removed every node")
    return g


# --------------------------------------------------------------------------
# statistics


def assortativity(graph: Graph) -> float:
    """Newman's categorical assortativity coefficient of ``graph.labels``.

    Unweighted: every edge counts once in each direction of the mixing matrix.
    """
    if not graph.is_labeled:
        raise GraphError("assortativity needs every node labeled")
    if graph.num_edges == 0:
        raise GraphError("assortativity needs at least one edge")
    k = int(graph.labels.max()) + 1
    lu = graph.labels[graph.edges[:, 0]]
    lv = graph.labels[graph.edges[:, 1]]
    e = np.zeros((k, k))
    np.add.at(e, (lu, lv), 1.0)
    np.add.at(e, (lv, lu), 1.0)
    e /= e.sum()
    a = e.sum(axis=1)
    b = e.sum(axis=0)
    ab = float(a @ b)
    if np.isclose(1.0 - ab, 0.0):
        raise GraphError("assortativity undefined: all edge endpoints share one group")
    return float((np.trace(e) - ab) / (1.0 - ab))


# --------------------------------------------------------------------------
# generators and community detection


@dataclass(frozen=True)
class SBMParams:
    """Stochastic block model parameters.

    Connection probabilities are ``p_in`` within and ``p_out`` between
    blocks. ``p_in`` may be a per-block sequence (blocks of different
    density). ``block_matrix`` overrides both when given.
    """

    block_sizes: tuple
    p_in: float | tuple = 0.0
    p_out: float = 0.0
    seed: int = 0
    block_matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(int(s) for s in self.block_sizes))
        if not self.block_sizes or min(self.block_sizes) < 1:
            raise ValueError("block sizes must be positive")
        b = self.connectivity()
        if b.shape != (len(self.block_sizes),) * 2:
            raise ValueError("block_matrix shape does not match block_sizes")
        if np.any(b < 0) or np.any(b > 1) or not np.allclose(b, b.T):
            raise ValueError("connection probabilities must be symmetric and in [0, 1]")

    @classmethod
    def homophilous(cls, block_sizes, p_in, p_out, seed=0) -> "SBMParams":
        if not 0 <= p_out <= np.min(p_in) <= 1:
            raise ValueError("homophilous SBM needs 0 <= p_out <= p_in <= 1")
        return cls(tuple(block_sizes), p_in, p_out, seed)

    def connectivity(self) -> np.ndarray:
        if self.block_matrix is not None:
            return np.asarray(self.block_matrix, dtype=float)
        k = len(self.block_sizes)
        b = np.full((k, k), float(self.p_out))
        np.fill_diagonal(b, np.broadcast_to(np.asarray(self.p_in, dtype=float), (k,)))
        return b


def sbm_sample(params: SBMParams) -> Graph:
    """Sample each pair ``i < j`` independently with its block probability."""
    rng = np.random.default_rng(params.seed)
    labels = np.repeat(np.arange(len(params.block_sizes)), params.block_sizes)
    n = len(labels)
    iu, ju = np.triu_indices(n, k=1)
    prob = params.connectivity()[labels[iu], labels[ju]]
    hit = rng.random(len(iu)) < prob
    edges = np.column_stack([iu[hit], ju[hit]])
    return Graph(n=n, edges=edges, weights=np.ones(len(edges)), labels=labels)


def louvain(graph: Graph, resolution: float = 1.0, seed: int = 0) -> np.ndarray:
    """Louvain modularity communities as a node -> community id array.

    Community ids are dense and ordered by each community's smallest node.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    comms = nx.community.louvain_communities(
        graph.to_networkx(), weight="weight", resolution=resolution, seed=seed)
    comms = sorted((sorted(c) for c in comms), key=lambda c: c[0])
    part = np.empty(graph.n, dtype=np.int64)
    for cid, members in enumerate(comms):
        part[members] = cid
    return part
