"""Group-free group fairness on homophilous networks.

Kernel-based between-group inequality, similarity kernels inferred from
network structure, and fairness-aware solvers for label post-processing,
information access and ranking.
"""

__version__ = "0.1.0"

from .graph import (
    Graph,
    GraphError,
    ParseError,
    PreprocessConfig,
    SBMParams,
    assortativity,
    load_edge_list,
    load_labels,
    load_node_values,
    louvain,
    preprocess,
    read_ratings,
    sbm_sample,
)
from .inequality import (
    DEFAULT,
    NORMVAR,
    EntropyConfig,
    Kernel,
    KernelError,
    blend_inequality,
    decompose,
    ge_index,
    ge_weighted,
    ground_truth_kernel,
    group_free_inequality,
    partition_between,
    prop2_bounds,
    smooth,
    std_dispersion,
)
from .kernels import (
    KERNEL_KINDS,
    Embedding,
    KernelConfig,
    cosine_kernel,
    laplacian_eigenmaps,
    laplacian_kernel,
    make_kernel,
)
from .classify import (
    RelabelInstance,
    RelabelResult,
    evaluate_relabel,
    solve,
    solve_exact,
    solve_heuristic,
    theta_sweep,
)
from .influence import (
    CascadeConfig,
    Objective,
    estimate_activation,
    evaluate_seeds,
    exact_activation,
    greedy_select,
)
from .ranking import (
    ExposurePolicy,
    PositionWeights,
    RankingObjectiveConfig,
    als_complete,
    frank_wolfe,
    tradeoff_sweep,
    unfairness,
    utility,
)

__all__ = [
    "als_complete",
    "assortativity",
    "blend_inequality",
    "CascadeConfig",
    "cosine_kernel",
    "decompose",
    "DEFAULT",
    "Embedding",
    "EntropyConfig",
    "estimate_activation",
    "evaluate_relabel",
    "evaluate_seeds",
    "exact_activation",
    "ExposurePolicy",
    "frank_wolfe",
    "ge_index",
    "ge_weighted",
    "Graph",
    "GraphError",
    "greedy_select",
    "ground_truth_kernel",
    "group_free_inequality",
    "Kernel",
    "KERNEL_KINDS",
    "KernelConfig",
    "KernelError",
    "laplacian_eigenmaps",
    "laplacian_kernel",
    "load_edge_list",
    "load_labels",
    "load_node_values",
    "louvain",
    "make_kernel",
    "NORMVAR",
    "Objective",
    "ParseError",
    "partition_between",
    "PositionWeights",
    "preprocess",
    "PreprocessConfig",
    "prop2_bounds",
    "RankingObjectiveConfig",
    "read_ratings",
    "RelabelInstance",
    "RelabelResult",
    "sbm_sample",
    "SBMParams",
    "smooth",
    "solve",
    "solve_exact",
    "solve_heuristic",
    "std_dispersion",
    "theta_sweep",
    "tradeoff_sweep",
    "unfairness",
    "utility",
]
