"""Hierarchical random walks and continuous-time quantum walks.

A global walker on a graph H coordinates one local walker per global
vertex; the package builds the discrete- and continuous-time hierarchical
walk operators, their blockwise spectral decompositions, the hierarchical
quantum evolution, and the joint position laws of the local walkers, with
an independent dense oracle for every fast path.
"""

from .errors import (
    ConstantOverlapViolated,
    DimensionCapExceeded,
    DimensionMismatch,
    ExponentOverflow,
    HierwalkError,
    InvalidP,
    InvalidProbabilityVector,
    IsolatedVertex,
    MissingTransition,
    NegativeLocalEigenvalue,
    NegativeTime,
    NegativeWeight,
    NonpositiveDiagonal,
    NoPositiveFixedVector,
    NotHermitian,
    NotIrreducible,
    NotReversible,
    ShapeMismatch,
)
from .graphs import (
    BalanceReport,
    GraphModel,
    SymmetricOperator,
    complete_graph_with_loops,
    cycle_graph,
    graph_from_dict,
    graph_to_dict,
    kbar_graph,
    loop_vertex,
    normalized_laplacian,
    path_graph,
    prepare_walk,
    star_graph,
    stationary_measure,
    uniform_walk_transition,
    verify_detailed_balance,
)
from .hierarchy import (
    DeformedBlock,
    DeformedSpectrum,
    HdtrwEigenpair,
    HdtrwEigenpairs,
    HierarchicalModel,
    WalkSpectralData,
    apply_hctrw,
    apply_hdtrw,
    build_hctrw,
    build_hdtrw,
    hctrw_core,
    hctrw_lambda,
    hctrw_spectral,
    hdtrw_eigenpairs,
    hierarchical_model,
    lift_local,
    reconstruct_hctrw,
    walk_spectral_data,
)
from .quantum import (
    HamiltonianAssembly,
    JointDistribution,
    KbarSpec,
    QuantumState,
    assemble_hamiltonian,
    constant_overlap,
    ctqw_distribution_from_system,
    evolve,
    factorized_distribution,
    joint_distribution,
    kbar_hamiltonian,
    kbar_joint_distribution,
    kbar_spec,
    kbar_tuple_vector,
    operator_split_joint_distribution,
    random_state,
    single_ctqw_distribution,
    uniform_state,
    vertex_state,
)
from .spectral import (
    EigenSystem,
    SpectralShift,
    TransitionSpectrum,
    canonical_phases,
    eigh,
    shift_to_nonnegative,
    transition_spectrum,
    tuple_iterator,
)

__version__ = "0.1.0"
