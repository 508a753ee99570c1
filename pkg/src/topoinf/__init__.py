"""Topology/task compatibility, per-edge influence scores, and graph rewiring.

The pipeline: a graph plus node labels and a polynomial filter (standing in
for a message-passing model's aggregation) give a compatibility number C;
each edge's influence score is the change in C when that edge alone is
removed; the scores drive edge-removal strategies and a biased edge-dropping
sampler.
"""

__version__ = "0.1.0"

from .compat import CompatReport, compatibility, node_influence, node_regularizer
from .csbm import (
    CsbmParams,
    CsbmSample,
    check_distance_contraction,
    check_variance_reduction,
    cora_like_params,
    generate_csbm,
)
from .filters import (
    PRESETS,
    FilterSpec,
    PolynomialFilter,
    SoftLabelMatrix,
    apply_filter,
    as_filter,
    expand_preset,
    soft_labels,
)
from .graphs import (
    Graph,
    GraphFormatError,
    LabelData,
    NormalizedAdjacency,
    khop_set,
    load_edge_list,
    load_labels,
    node_set,
    normalized_adjacency,
    remove_edge,
    write_edge_list,
    write_labels,
)
from .influence import (
    DeltaWorkspace,
    RemovalStep,
    ScoreReport,
    TopoInfScore,
    build_workspace,
    greedy_refine,
    score_all_edges,
    topoinf_incremental,
    topoinf_oracle,
)
from .pseudo import (
    LinearModel,
    PseudoLabels,
    TrainConfig,
    predict_pseudo,
    train_linear_sgc,
)
from .rewire import (
    DropEdgeDistribution,
    EdgePartition,
    RemovalPlan,
    adaedge_partition,
    dropedge_weights,
    remove_by_topoinf,
    remove_random,
    sample_dropedge,
)

__all__ = [name for name in dir() if not name.startswith("_")]
