"""Entanglement cost and distributed construction of pure states over
tree-shaped networks.

The library rooted-labels a tree of parties, decomposes a joint pure state
into per-vertex coefficient tensors, compiles and simulates the local
measurement protocol that builds the state from per-edge entangled pairs,
and computes exact and finite-block-size approximate costs per edge.
"""

from .approx import (
    ApproxCostRow,
    ApproxReport,
    ApproxState,
    EdgeProjection,
    UnionBoundReport,
    approx_state,
    build_projection,
    construct_approx,
    union_bound_check,
)
from .costs import (
    CostReport,
    EdgeCostRow,
    SecondOrderCoeffs,
    Spectrum,
    approx_bounds,
    exact_edge_cost,
    figure_data,
    optimize_thresholds,
    second_order,
    spectrum_entropy,
)
from .decomposition import (
    CanonicalMPS,
    TreeDecomposition,
    contract_mps,
    decompose,
    decomposition_from_mps,
    mps_canonical_form,
    recompose,
    vertex_gram_defect,
)
from .errors import (
    DegenerateDenominator,
    DimensionCapExceeded,
    DimensionMismatch,
    EmptyKeepSet,
    EnumerationCapExceeded,
    IncompatibleDims,
    InsufficientResource,
    InvalidEpsilon,
    InvalidEta,
    InvalidGrid,
    MalformedProgram,
    MalformedTensors,
    NotALine,
    NotATree,
    OutOfRangeIndex,
    ThresholdBudgetExceeded,
    TreecostError,
    UnknownEdge,
    UnknownParty,
    UnknownRoot,
    ZeroNorm,
    ZeroProbabilityBranch,
)
from .protocol import (
    CompletenessReport,
    Event,
    MeasurementProgram,
    ResourceConfig,
    Transcript,
    build_program,
    check_completeness,
    correction_unitary,
    enumerate_branches,
    generalized_pauli_x,
    generalized_pauli_z,
    naive_distribution_cost,
    simulate,
)
from .quantile import inverse_normal_cdf, normal_cdf, normal_pdf
from .states import (
    DensityOperator,
    PureState,
    SchmidtData,
    dump_state_json,
    fidelity_pure,
    load_state_json,
    make_named_state,
    normalized_state,
    reduced_state,
    schmidt_reconstruct,
    schmidt_wrt_edge,
    trace_distance,
    trace_distance_pure,
)
from .tree import (
    Edge,
    RootedTree,
    bipartition,
    descendants_closure,
    load_tree_json,
    root_and_relabel,
)
from .verify import run_checks

__version__ = "0.1.0"

__all__ = [
    "ApproxCostRow",
    "ApproxReport",
    "ApproxState",
    "CanonicalMPS",
    "CompletenessReport",
    "CostReport",
    "DegenerateDenominator",
    "DensityOperator",
    "DimensionCapExceeded",
    "DimensionMismatch",
    "Edge",
    "EdgeCostRow",
    "EdgeProjection",
    "EmptyKeepSet",
    "EnumerationCapExceeded",
    "Event",
    "IncompatibleDims",
    "InsufficientResource",
    "InvalidEpsilon",
    "InvalidEta",
    "InvalidGrid",
    "MalformedProgram",
    "MalformedTensors",
    "MeasurementProgram",
    "NotALine",
    "NotATree",
    "OutOfRangeIndex",
    "PureState",
    "ResourceConfig",
    "RootedTree",
    "SchmidtData",
    "SecondOrderCoeffs",
    "Spectrum",
    "ThresholdBudgetExceeded",
    "Transcript",
    "TreeDecomposition",
    "TreecostError",
    "UnionBoundReport",
    "UnknownEdge",
    "UnknownParty",
    "UnknownRoot",
    "ZeroNorm",
    "ZeroProbabilityBranch",
    "approx_bounds",
    "approx_state",
    "bipartition",
    "build_program",
    "build_projection",
    "check_completeness",
    "construct_approx",
    "contract_mps",
    "correction_unitary",
    "decompose",
    "decomposition_from_mps",
    "descendants_closure",
    "dump_state_json",
    "enumerate_branches",
    "exact_edge_cost",
    "fidelity_pure",
    "figure_data",
    "generalized_pauli_x",
    "generalized_pauli_z",
    "inverse_normal_cdf",
    "load_state_json",
    "load_tree_json",
    "make_named_state",
    "mps_canonical_form",
    "naive_distribution_cost",
    "normal_cdf",
    "normal_pdf",
    "normalized_state",
    "optimize_thresholds",
    "recompose",
    "reduced_state",
    "root_and_relabel",
    "run_checks",
    "schmidt_reconstruct",
    "schmidt_wrt_edge",
    "second_order",
    "simulate",
    "spectrum_entropy",
    "trace_distance",
    "trace_distance_pure",
    "union_bound_check",
    "vertex_gram_defect",
]
