"""Low-multilinear-rank approximation of spiked tensors.

Truncated MLSVD and HOOI estimators, closed-form large-dimensional
predictions for their behavior under Gaussian noise, and a seeded
Monte-Carlo harness that compares the two.
"""
from .decomposition import (
    HooiReport,
    core_proportionality_check,
    hooi,
    reconstruct,
    reconstruction_error,
    truncated_mlsvd,
)
from .linalg import (
    SpectralResult,
    dominant_left_subspace,
    full_gram_spectrum,
    mean_alignment,
    orthonormalize,
    principal_angles,
)
from .rmt_theory import (
    ScalePair,
    SpikePrediction,
    count_outliers,
    hooi_convergence_diagnostic,
    ks_distance,
    noise_contraction_bound,
    predicted_mean_alignment,
    scales,
    semicircle_cdf,
    semicircle_pdf,
    sigma_n,
    spike_prediction,
    stieltjes_sc,
)
from .spiked_model import (
    SpikedInstance,
    haar_basis,
    make_rng,
    make_signal,
    sample_instance,
    sample_observation,
)
from .tensor_core import (
    TuckerFactors,
    contract,
    cpd_rank_bounds,
    fold,
    frob_inner,
    frob_norm,
    kron,
    mode_gram,
    outer,
    tucker_to_full,
    unfold,
)

__version__ = "0.1.0"
