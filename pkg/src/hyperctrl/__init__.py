"""Controllability analysis for uniform and non-uniform hypergraphs."""

from .controllability import (
    ControllabilityVerdict,
    ReducedControllabilityMatrix,
    VerdictKind,
    closure_basis,
    lemma1_check,
    reduced_controllability,
    verdict,
)
from .hypergraph import (
    Hypergraph,
    adjacency_auto,
    adjacency_general,
    adjacency_uniform,
    complete,
    degrees,
    hyperchain,
    hyperring,
    hyperstar,
    overlap_variant,
    random_uniform,
)
from .ingest import (
    MultiCorrelation,
    TimeSeriesMatrix,
    build_hypergraph,
    load_time_series_csv,
    multi_correlation,
)
from .mcn import (
    Component,
    ExactSearchGuardError,
    MCNResult,
    connected_components,
    mcn_exact,
    mcn_greedy,
    mcn_predicted,
)
from .tensor import (
    AdjacencyTensor,
    BlowupError,
    ControlMatrix,
    InputSchedule,
    Trajectory,
    dense_tensor,
    drift,
    simulate,
    ttv_multi,
    ttv_multi_cols,
)

__version__ = "0.1.0"
