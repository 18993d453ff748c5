"""Mixed membership stochastic block model estimation by successive projections."""
from .estimator import (
    SPOC,
    EstimationResult,
    PermutationAlignment,
    align_columns,
    align_to_truth,
    spoc,
    spoc_oracle,
    threshold_communities,
)
from .exceptions import (
    ConvergenceError,
    DataFormatError,
    DimensionError,
    EigenSolverError,
    NumericalError,
    RankDeficiencyError,
    SingularFactorError,
    SpocError,
)
from .metrics import (
    DiagnosticsBundle,
    beta_row,
    beta_rows,
    compute_diagnostics,
    concentration_check,
    relative_frobenius_error,
    spearman_quality,
    theorem2_check,
)
from .model import (
    SimulationConfig,
    check_identifiability,
    edge_probabilities,
    sample_adjacency,
    sample_membership,
    simulate,
)
from .spa import precondition_mvee, spa, spa_error_bound
from .spectral import SpectralEmbedding, spectral_norm, top_k_eigen

__version__ = "0.1.0"
