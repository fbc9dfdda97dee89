"""Gabor-matrix discretization of heat-type and metaplectic evolution operators."""

from .analytic import (
    DecayBoundSpec,
    GaborMatrixWindow,
    GenHeat,
    Heat,
    Repulsor,
    analytic_window,
    genheat_constants,
    genheat_entry_bound,
    heat_domination_bound,
    heat_domination_rate,
    heat_entry_modulus,
    repulsor_entry_modulus,
    superexp_ft_bound,
    weight_convolution_check,
)
from .core_tf import (
    FrameOperator,
    GaussianWindow,
    Grid,
    LatticeIndex,
    LatticeParams,
    SampledFunction,
    Spectrogram,
    continuous_ft,
    frame_bounds_estimate,
    inner_product,
    inverse_ft,
    lattice_indices,
    stft_grid,
    tf_shift_sample,
    torus_grid,
)
from .errors import (
    ConditioningError,
    GaborError,
    IncompatibleGridsError,
    InvalidParameterError,
    IterationLimitError,
    NotAFrameError,
    NotRepresentableError,
    PhaseUnavailableError,
    SupportTruncationError,
    TruncationWarning,
    UnsupportedDimensionError,
)
from .metaplectic import (
    GaussianDescriptor,
    SymplecticGenerator,
    SymplecticMatrix,
    hamiltonian_generator,
    mu_apply,
    repulsor_apply,
    repulsor_apply_shifted_gaussian,
    repulsor_flow,
    repulsor_generator,
    symplectic_exp,
)
from .oracle import (
    MultiplierSymbol,
    gabor_entry_oracle,
    gabor_entry_oracle_complex,
    genheat_symbol,
    heat_symbol,
    identity_entry_oracle,
    identity_symbol,
    multiplier_apply,
    oracle_matrix,
    oracle_window,
    superexp_ft_oracle,
)
from .sparsity import (
    DualWindow,
    SparseGaborMatrix,
    apply_via_gabor,
    build_sparse_matrix,
    dual_window,
    reconstruct,
    support_radius,
)

__version__ = "0.1.0"
