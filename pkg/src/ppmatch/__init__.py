"""Seeded graph matching on correlated random graph models.

The core pipeline alternates a power step ``C = A X B`` with a greedy
projection onto permutation matrices; spectral baselines provide seedless
initializations and a Monte Carlo harness reproduces the synthetic studies.
"""

from .baselines import (
    DEFAULT_GRAMPA_ETA,
    SpectralDecomposition,
    grampa,
    grampa_similarity,
    spectral_decomposition,
    umeyama,
    umeyama_similarity,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    InfeasibleOverlapError,
    InfeasibleRangeError,
    InstanceTooLargeError,
    InvalidInputError,
    InvalidParameterError,
    NumericalError,
    PpmatchError,
)
from .harness import (
    CSV_HEADER,
    EXPERIMENTS,
    METHODS,
    SCHEME_LABELS,
    ExperimentConfig,
    RunRecord,
    dump_config,
    emit_csv,
    emit_summary_csv,
    load_config,
    run_experiment,
    run_iter_sweep,
    run_refine,
    run_seed_sweep,
    run_sparsify_sweep,
    validate_config,
)
from .matching import (
    MatchResult,
    PpmOptions,
    brute_force_qap,
    gmwm,
    power_step,
    ppmgm,
    qap_objective,
    remove_diagonal,
)
from .models import (
    CerModel,
    CgwModel,
    CorrelatedPair,
    NoiseModel,
    Permutation,
    sample_cer,
    sample_cgw,
    sample_goe,
    sample_permutation_uniform,
    sample_seed_with_overlap,
    substream,
)
from .sparsify import (
    Binarize,
    HardThreshold,
    SparsifyScheme,
    TopK,
    apply_scheme,
    default_top_k,
    density_of_threshold,
    density_range,
    threshold_for_density,
)
from .theory import (
    BoundReport,
    expected_power_step_entry,
    frobenius_seed_distance,
    is_diag_dominant,
    is_row_col_dominant,
    one_iteration_rate_constant,
    one_iteration_success_bound,
    overlap,
    partial_recovery_bound,
    seed_corruption_tolerance,
)

__version__ = "0.1.0"
