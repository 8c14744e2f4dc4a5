"""``homofair`` command-line front end.

Every command writes one CSV (or kernel file) plus a ``<out>.manifest.json``
describing the run. Outputs are written to a temporary file and moved into
place only on success, so a failed run leaves nothing behind.

Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible or failed
optimization. ``HOMOFAIR_SEED`` replaces the default seed of every command
when ``--seed`` is not given.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io as _io
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .classify import solve, solve_exact, solve_heuristic, theta_sweep
from .graph import (GraphError, PreprocessConfig, SBMParams, assortativity, load_edge_list,
                    load_labels, load_node_values, preprocess, read_ratings, sbm_sample)
from .inequality import DEFAULT, NORMVAR, KernelError, blend_inequality, prop2_bounds
from .influence import OBJECTIVES, CascadeConfig, Objective, evaluate_seeds, greedy_select
from .io import export_graph, write_embedding, write_kernel_binary, write_kernel_csv
from .kernels import KernelConfig, cosine_kernel, laplacian_eigenmaps, make_kernel
from .ranking import PositionWeights, als_complete, tradeoff_sweep

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Infeasible(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# helpers


def _default_seed() -> int:
    env = os.environ.get("HOMOFAIR_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"HOMOFAIR_SEED must be an integer, got {env!r}") from None


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write(path: Path, writer) -> None:
    """Call ``writer(tmp_path)`` then move the result onto ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(fd)
    try:
        writer(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = _io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    wr.writeheader()
    for row in rows:
        wr.writerow({k: _fmt(row.get(k)) for k in columns})
    return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def _manifest(args, out: Path, seeds: dict, inputs: list) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    return {
        "command": args.command,
        "params": {k: (str(v) if isinstance(v, Path) else v) for k, v in params.items()},
        "seeds": seeds,
        "version": __version__,
        "inputs": {str(p): _digest(p) for p in inputs if p is not None},
        "output": out.name,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def _emit(args, out: Path, rows, columns, seeds=None, inputs=()):
    text = _csv_text(rows, columns)
    _atomic_write(out, lambda p: p.write_text(text))
    _write_manifest(args, out, seeds or {}, inputs)


def _write_manifest(args, out: Path, seeds, inputs, extra=None):
    man = _manifest(args, out, seeds, list(inputs))
    if extra:
        man.update(extra)
    text = json.dumps(man, indent=2, sort_keys=True) + "\n"
    _atomic_write(Path(f"{out}.manifest.json"), lambda p: p.write_text(text))


def _require_file(path):
    if path is not None and not Path(path).is_file():
        raise FileNotFoundError(f"no such file: {path}")


def _load_graph(args, need_labels=True):
    _require_file(args.graph)
    _require_file(args.labels)
    g = load_edge_list(args.graph, directed_as_undirected=args.directed)
    if args.labels is not None:
        g = load_labels(args.labels, g)
    elif need_labels:
        raise UsageError("--labels is required for this command")
    cfg = PreprocessConfig(min_degree=args.min_degree, min_group_size=args.min_group_size,
                           take_largest_cc=not args.keep_all_components)
    g = preprocess(g, cfg)
    if need_labels and not g.is_labeled:
        missing = int(np.sum(g.labels < 0))
        raise GraphError(f"{missing} node(s) have no label in {args.labels}")
    return g


def _kernel_kind(name: str) -> str:
    return name.replace("-", "_")


# --------------------------------------------------------------------------
# commands


def cmd_sbm(args):
    seed = _seed(args)
    p_in = args.p_in[0] if len(args.p_in) == 1 else tuple(args.p_in)
    g = sbm_sample(SBMParams(tuple(args.blocks), p_in, args.p_out, seed=seed))
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    manifest = export_graph(g, prefix)
    _write_manifest(args, Path(f"{prefix}.edges"), {"sbm": seed}, [], {"graph": manifest})
    print(f"wrote {prefix}.edges ({g.n} nodes, {g.num_edges} edges, "
          f"assortativity {manifest.get('assortativity')})")


def cmd_kernel(args):
    g = _load_graph(args, need_labels=args.kind == "ground-truth")
    kind = _kernel_kind(args.kind)
    seed = _seed(args)
    out = Path(args.out)
    if kind == "laplacian":
        emb = laplacian_eigenmaps(g, KernelConfig(dim=args.dim))
        K = cosine_kernel(emb)
        if args.embedding_out:
            emb_path = Path(args.embedding_out)
            _atomic_write(emb_path, lambda p: np.savetxt(p, emb.Z, delimiter=",", fmt="%.17g"))
            write_embedding(emb, emb_path, {"dim": args.dim, "zero_tol": 1e-8})
    else:
        K = make_kernel(kind, g, dim=args.dim, resolution=args.resolution, seed=seed)
    writer = write_kernel_binary if args.format == "binary" else write_kernel_csv
    _atomic_write(out, lambda p: writer(K, p))
    _write_manifest(args, out, {"louvain": seed}, [args.graph, args.labels],
                    {"n": g.n, "node_ids": [str(i) for i in g.node_ids]})
    print(f"wrote {kind} kernel ({g.n} x {g.n}) to {out}")


def cmd_bounds(args):
    if (args.p is None) != (args.q is None):
        raise UsageError("--p and --q must be given together")
    if args.p is not None and len(args.p) != len(args.q):
        raise UsageError("--p and --q need the same number of values")
    panels = list(zip(args.p, args.q)) if args.p is not None else [(2.0, 1.0), (1.0, 1.0), (1.0, 2.0)]
    eps = np.linspace(0.0, 0.5, args.steps)
    rows = []
    for p, q in panels:
        for e in eps:
            lo, hi, d0 = prop2_bounds(p, q, float(e))
            rows.append({"p": p, "q": q, "epsilon": float(e), "delta0": d0, "lower": lo,
                         "upper": hi,
                         "blend": blend_inequality(p, q, d0) if p > q else None})
    _emit(args, Path(args.out), rows,
          ["p", "q", "epsilon", "delta0", "lower", "upper", "blend"])
    print(f"wrote {len(rows)} rows to {args.out}")


def cmd_classify(args):
    g = _load_graph(args)
    if (args.yhat is None) == (args.positive_groups is None):
        raise UsageError("give exactly one of --yhat and --positive-groups")
    if args.yhat is not None:
        _require_file(args.yhat)
        y_hat = load_node_values(args.yhat, g)
        if not np.all((y_hat == 0) | (y_hat == 1)):
            raise GraphError(f"{args.yhat}: predictions must be 0 or 1")
    else:
        names = [str(n) for n in g.label_names]
        unknown = [s for s in args.positive_groups if s not in names]
        if unknown:
            raise GraphError(f"unknown group(s) {unknown}; groups are {names}")
        pos = [names.index(s) for s in args.positive_groups]
        y_hat = np.isin(g.labels, pos).astype(float)
    if y_hat.sum() == 0:
        raise GraphError("no positive predictions; nothing to redistribute")
    seed = _seed(args)
    K = make_kernel(_kernel_kind(args.kernel), g, dim=args.dim, seed=seed)
    solver = {"auto": solve, "exact": solve_exact, "heuristic": solve_heuristic}[args.solver]
    thetas = np.linspace(0.0, args.theta_max, args.steps)
    rows, _ = theta_sweep(y_hat.astype(int), K, thetas, labels=g.labels, cfg=NORMVAR
                          if args.variant == "normalized_variance" else DEFAULT, solver=solver)
    if not rows:
        raise Infeasible("no threshold in the sweep admits a feasible relabeling")
    _emit(args, Path(args.out), rows, ["theta", "flips", "flip_fraction", "delta0", "min_exposure"],
          {"louvain": seed}, [args.graph, args.labels, args.yhat])
    stop = "" if len(rows) == len(thetas) else f" (infeasible from theta={thetas[len(rows)]:.4g})"
    print(f"wrote {len(rows)} rows to {args.out}{stop}")


def cmd_influence(args):
    g = _load_graph(args)
    if not 1 <= args.budget <= g.n:
        raise UsageError(f"--budget must lie in 1..{g.n}")
    seed = _seed(args)
    kind = args.objective
    kernel = None
    if kind == "group_free":
        kernel = make_kernel(_kernel_kind(args.kernel), g, dim=args.kernel_dim, seed=seed)
    elif kind.startswith("community"):
        kernel = make_kernel("louvain", g, resolution=args.resolution, seed=seed)
    obj = Objective(kind, kernel)
    cfg = CascadeConfig(transmission_p=args.p, num_samples=args.samples, seed=seed)
    seeds = greedy_select(g, args.budget, obj, cfg)
    rows = evaluate_seeds(g, seeds, g.labels, cfg, objective=obj)
    for row in rows:
        row["seed_node"] = g.node_ids[row["seed_node"]]
    _emit(args, Path(args.out), rows, ["budget", "seed_node", "delta0", "reach", "objective_value"],
          {"cascade": seed, "louvain": seed}, [args.graph, args.labels])
    print(f"wrote {len(rows)} rows to {args.out}")


def _rating_matrix(path, g):
    users, items, counts = read_ratings(path)
    index = {str(k): i for i, k in enumerate(g.node_ids)}
    keep = [k for k, u in enumerate(users) if str(u) in index]
    if not keep:
        raise GraphError(f"{path}: no rating belongs to a node of the graph")
    item_names = sorted({str(items[k]) for k in keep})
    col = {name: j for j, name in enumerate(item_names)}
    R = np.zeros((g.n, len(item_names)))
    for k in keep:
        R[index[str(users[k])], col[str(items[k])]] += counts[k]
    return R


def cmd_rank(args):
    g = _load_graph(args)
    _require_file(args.ratings)
    R = _rating_matrix(args.ratings, g)
    n, m = R.shape
    if not 1 <= args.kbar <= m:
        raise UsageError(f"--kbar must lie in 1..{m} (number of items)")
    seed = _seed(args)
    rho = als_complete(R, rank=args.als_rank, iterations=args.als_iters, reg=args.als_reg, seed=seed)
    kernels = {}
    for name in args.kernel:
        kind = _kernel_kind(name)
        kernels[kind] = make_kernel(kind, g, dim=args.dim, seed=seed)
    weights = PositionWeights.dcg(m, args.kbar)
    rows = tradeoff_sweep(rho, kernels, g.labels, args.beta_grid, weights,
                          eta=args.eta, iters=args.iters)
    _emit(args, Path(args.out), rows, ["beta", "kernel", "avg_utility", "gt_unfairness", "iterations"],
          {"als": seed, "louvain": seed}, [args.graph, args.labels, args.ratings])
    print(f"wrote {len(rows)} rows to {args.out}")


def cmd_assort(args):
    g = _load_graph(args)
    sizes = g.group_sizes()
    rows = [{"n": g.n, "edges": g.num_edges, "groups": len(sizes),
             "assortativity": assortativity(g)}]
    _emit(args, Path(args.out), rows, ["n", "edges", "groups", "assortativity"],
          {}, [args.graph, args.labels])
    print(f"n={g.n} edges={g.num_edges} groups={len(sizes)} r={rows[0]['assortativity']:.4f}")


# --------------------------------------------------------------------------
# parser


def _graph_args(p, labels_required=True):
    p.add_argument("--graph", required=True, help="edge list (u v [weight])")
    p.add_argument("--labels", required=labels_required, default=None,
                   help="node_id,label CSV")
    p.add_argument("--directed", action="store_true",
                   help="input lists directed arcs; merge reciprocal pairs")
    p.add_argument("--min-degree", type=int, default=0)
    p.add_argument("--min-group-size", type=int, default=0)
    p.add_argument("--keep-all-components", action="store_true",
                   help="skip the largest-connected-component filter")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="homofair", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"homofair {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sbm", help="sample a stochastic block model graph")
    p.add_argument("--blocks", type=_int_list, default=[100, 100, 100])
    p.add_argument("--p-in", type=_float_list, default=[0.2],
                   help="within-block probability, one value or one per block")
    p.add_argument("--p-out", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_sbm)

    p = sub.add_parser("kernel", help="infer a similarity kernel from a graph")
    _graph_args(p, labels_required=False)
    p.add_argument("--kind", choices=["laplacian", "ground-truth", "identity", "louvain"],
                   default="laplacian")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--format", choices=["csv", "binary"], default="csv")
    p.add_argument("--embedding-out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("bounds", help="confounder bounds over a grid of epsilon")
    p.add_argument("--p", type=_float_list, default=None)
    p.add_argument("--q", type=_float_list, default=None)
    p.add_argument("--steps", type=int, default=51)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("classify", help="minimum-flip relabeling sweep over theta")
    _graph_args(p)
    p.add_argument("--yhat", default=None, help="node_id,prediction CSV (0/1)")
    p.add_argument("--positive-groups", type=lambda s: [t for t in s.split(",") if t],
                   default=None, help="predict 1 exactly for these label values")
    p.add_argument("--kernel", choices=["laplacian", "ground-truth", "louvain"],
                   default="laplacian")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--theta-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--solver", choices=["auto", "exact", "heuristic"], default="auto")
    p.add_argument("--variant", choices=["generalized_entropy", "normalized_variance"],
                   default="generalized_entropy")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("influence", help="greedy seed selection under independent cascade")
    _graph_args(p)
    p.add_argument("--objective", choices=list(OBJECTIVES), default="group_free")
    p.add_argument("--kernel", choices=["laplacian", "ground-truth", "louvain", "identity"],
                   default="laplacian", help="kernel for the group_free objective")
    p.add_argument("--kernel-dim", type=int, default=2)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--p", type=float, default=0.1, help="transmission probability")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_influence)

    p = sub.add_parser("rank", help="utility / fairness trade-off of exposure-fair ranking")
    _graph_args(p)
    p.add_argument("--ratings", required=True, help="user_id,item_id,count CSV")
    p.add_argument("--kernel", type=lambda s: [t for t in s.split(",") if t],
                   default=["laplacian"], help="comma-separated kernel kinds")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--beta-grid", type=_float_list, default=[0.0, 0.1, 1.0, 10.0])
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--kbar", type=int, default=40)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--als-rank", type=int, default=32)
    p.add_argument("--als-iters", type=int, default=15)
    p.add_argument("--als-reg", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("assort", help="size and assortativity after preprocessing")
    _graph_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assort)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "rank":
        bad = [k for k in args.kernel if _kernel_kind(k) not in
               ("laplacian", "ground_truth", "identity", "louvain")]
        if bad:
            parser.error(f"unknown kernel kind(s) {bad}")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"homofair {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Infeasible as exc:
        print(f"homofair {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, GraphError, KernelError, ValueError) as exc:
        print(f"homofair {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
