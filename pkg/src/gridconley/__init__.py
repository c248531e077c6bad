"""Computational dynamics of closed relations on grid decompositions.

Finite grids turn maps, semiflows and hybrid systems into bitmask
relations; chain recurrence, attractor-repeller structure, Lyapunov
fields, Conley index pairs and structured perturbations all become
finite fixpoint computations with checkable certificates.
"""

from .cells import CellSet
from .chain import (
    ChainAnalysis,
    ChainBoundReport,
    chain_analysis,
    chain_ladder,
    chain_reachable,
    chain_step,
    chain_transitive,
    restricted_chain_bound_check,
)
from .conley import (
    BoundaryReport,
    IndexPair,
    IndexPairCheck,
    IsolationReport,
    RobustnessReport,
    StableUnstable,
    build_index_pair,
    default_ladder,
    f_boundary,
    isolating_checks,
    precedes,
    quotient_relation,
    robustness_radius,
    stable_unstable,
    validate_index_pair,
    wedge,
)
from .grid import (
    GridSpace,
    dilation_relation,
    hausdorff_distance,
    outer_approximate_map,
)
from .hybrid import (
    HybridPath,
    HybridSystem,
    HybridTimeDomain,
    SpannedOrbit,
    associated_relation,
    build_spanning_path,
    enumerate_hybrid_paths,
    hybrid_boundary,
    hybrid_chain_query,
    hybrid_conley,
    hybrid_lyapunov,
    hybrid_superlevel_inward,
    hybrid_viability,
    invariance_flags,
    path_is_valid,
    restricted_associated_relation,
    span_decomposition,
    teel_relation,
)
from .lyapunov import (
    LyapunovCheck,
    LyapunovField,
    complete_lyapunov,
    pair_lyapunov,
    sublevel_inward,
    verify_lyapunov,
)
from .morse import (
    AttractorRepellerPair,
    MorseGraph,
    ar_family,
    ar_family_from_analysis,
    attractor_of_inward,
    dual_repeller,
    is_inward,
    membership_signature,
    morse_graph,
)
from .perturbation import (
    PerturbationCertificate,
    RepellerElimination,
    SaddleElimination,
    certify_perturbation,
    eliminate_repeller,
    eliminate_saddle,
    eps_dense_complement,
    retraction_relation,
)
from .samplers import (
    SAMPLERS,
    double_map,
    get_sampler,
    saddle_map,
    saddle_surjective_map,
)
from .relation import (
    Relation,
    StructuralPredicates,
    compose,
    cyclic_set,
    is_surjective,
    iterate,
    orbit_relation,
    recurrent_cells,
    star,
    star_n,
    structural_predicates,
)
from .semiflow import (
    SemiflowApprox,
    TimedRelationTable,
    TimeHorizonReport,
    interval_relation,
    lattice_index,
    phi_boundary,
    refine_weak_semiflow,
    restricted_interval_relation,
    semiflow_conley,
    tau_and_terminal,
    weak_semiflow_fixpoint,
)
from .specio import (
    AnalysisReport,
    SpecError,
    SystemSpec,
    build_system,
    emit,
    load_spec,
    run,
)
from .viability import (
    OmegaLimit,
    ViabilityReport,
    annihilation_depth,
    enumerate_paths,
    invariance_predicates,
    minimal_viable_subsets,
    omega_limsup,
    viability_report,
)

__version__ = "0.1.0"
