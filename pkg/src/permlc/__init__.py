"""Permanents of Hermitian matrices with spectrum in [1, 2] as integrals of a log-concave density."""

from .density import (
    DensityModel,
    build_density,
    check_lemma_concavity,
    check_logconcavity,
    check_q_psd,
    eval_linear_forms,
    grad_log_density,
    log_density,
    q_form,
    to_complex,
    to_real,
)
from .diagnostics import Diagnostics, diagnostics, effective_sample_size, split_rhat
from .errors import (
    ChainDiverged,
    DimensionMismatch,
    DimensionTooLarge,
    EigenConvergenceError,
    InsufficientSamples,
    NonFiniteWeight,
    NotHermitianError,
    PermlcError,
    SpectrumOutOfRange,
)
from .estimators import (
    ChainState,
    EstimateReport,
    SamplerConfig,
    estimate_anneal,
    estimate_direct,
    sample_complex_gaussian,
    wick_check,
)
from .hermitian import (
    LinearFormBundle,
    SpectralDecomposition,
    as_hermitian,
    factor_psd,
    gram_conjugate,
    random_instance,
    random_psd,
    spectral_decompose,
    split_identity,
)
from .jsonio import read_matrix, write_matrix
from .permanent import permanent_definition, permanent_ryser, subset_expansion

__version__ = "0.1.0"
