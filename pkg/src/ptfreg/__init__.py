"""Regularity decompositions and low-weight integer approximators for
polynomial threshold functions on the Boolean cube."""
from .checks import (
    CheckReport,
    EnsembleResult,
    anticoncentration_check,
    concentration_profile,
    concentration_tail,
    dist,
    ensemble_experiment,
    gaussian_invariance_gap,
    hypercontractivity_check,
    minimal_passing_c0,
    regular_anticoncentration,
    sample_from_D,
)
from .constants import TheoryConstants
from .errors import (
    DegenerateInputError,
    InternalError,
    InvalidInputError,
    PTFError,
    ResourceLimitError,
)
from .influence import (
    InfluenceProfile,
    critical_index,
    head_tail_split,
    influence_profile,
    is_l2_regular,
    is_tau_regular,
    tail_influence_sum,
)
from .lowweight import (
    ApproximationCertificate,
    IntegerPolynomial,
    approximate,
    combine_tree,
    indicator_poly,
    integerize_constant,
    round_regular,
    weight_of,
)
from .poly import (
    MultilinearPolynomial,
    Restriction,
    TruthTable,
    evaluate,
    fwht_analyze,
    fwht_synthesize,
    load_polynomial,
    multiply,
    norms,
    normalize_variance,
    random_polynomial,
    restrict,
)
from .tree import (
    DecompositionTree,
    LeafKind,
    build_tree,
    derive_parameters,
    good_restriction_census,
    path_mass,
)

__version__ = "0.1.0"

__all__ = [
    "anticoncentration_check",
    "approximate",
    "ApproximationCertificate",
    "build_tree",
    "CheckReport",
    "combine_tree",
    "concentration_profile",
    "concentration_tail",
    "critical_index",
    "DecompositionTree",
    "DegenerateInputError",
    "derive_parameters",
    "dist",
    "ensemble_experiment",
    "EnsembleResult",
    "evaluate",
    "fwht_analyze",
    "fwht_synthesize",
    "gaussian_invariance_gap",
    "good_restriction_census",
    "head_tail_split",
    "hypercontractivity_check",
    "indicator_poly",
    "influence_profile",
    "InfluenceProfile",
    "integerize_constant",
    "IntegerPolynomial",
    "InternalError",
    "InvalidInputError",
    "is_l2_regular",
    "is_tau_regular",
    "LeafKind",
    "load_polynomial",
    "minimal_passing_c0",
    "MultilinearPolynomial",
    "multiply",
    "normalize_variance",
    "norms",
    "path_mass",
    "PTFError",
    "random_polynomial",
    "regular_anticoncentration",
    "ResourceLimitError",
    "restrict",
    "Restriction",
    "round_regular",
    "sample_from_D",
    "tail_influence_sum",
    "TheoryConstants",
    "TruthTable",
    "weight_of",
]
