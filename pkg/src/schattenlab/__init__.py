"""Numerical workbench for truncated shift-polynomial p-norms on scalar and
Schatten-valued sequence spaces, Schur and Fourier multipliers with their
finite-dimensional dilations, fermionic Wick calculus, and entrywise
semigroup kernels."""

__version__ = "0.1.0"

from .matrices import (
    PExponent,
    SingularSpectrum,
    duality_map_matrix,
    duality_map_vector,
    is_psd,
    lp_norm,
    matrix_from_json,
    matrix_to_json,
    schatten_norm,
    singular_values,
)
from .pnorm import (
    BlockOperator,
    MatrixSpaceOperator,
    PNormConfig,
    PNormEstimate,
    estimate_pnorm,
    exact_pnorm_special,
    mixed_norm,
    sample_lower_bound,
)
from .shifts import (
    NormProfile,
    Polynomial,
    classify_extremal,
    compute_profile,
    gap_search,
    poly_norm,
    poly_vector_norm,
    sigma_conjugation_check,
    sigma_norm,
    sup_circle,
    toeplitz_of,
)
from .fock import (
    FockSpace,
    build_fock,
    enumerate_pair_partitions,
    omega,
    q_gram,
    q_gram_matrix,
    vacuum_trace,
    wick_trace,
    wick_vs_matrix_check,
)
from .multipliers import (
    FiniteGroup,
    certify,
    embed_two_by_two,
    fourier_apply,
    gram_factorize,
    herz_schur_transfer,
    make_group,
    regular_rep,
    schur_apply,
)
from .dilation import (
    KernelFunction,
    SemigroupSpec,
    dilate_fourier_finite,
    dilate_schur,
    discretize_kernel,
    gaussian_semigroup_dilate,
    schoenberg_check,
    semigroup_convolution,
    verify_dilation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
