"""Spectral laboratory for first-order Sobolev and Dirac-Sobolev norms on a periodic box."""

from .clifford import apply_matrix, dirac_matrices, dirac_symbol, inverse_symbol, vec_p_norm
from .field import (
    GridSpec,
    NormReport,
    ScalarField,
    SpinorField,
    bump,
    dsf1_load,
    dsf1_store,
    fft_forward,
    fft_inverse,
    gaussian,
    lp_norm,
    make_grid,
    mollified_delta,
    random_bandlimited,
    rescale_field,
    sample,
)
from .norms import dirac_sobolev_norm, local_hardy_norm, norm_report, sobolev_norm
from .psido import (
    apply_matrix_multiplier,
    apply_scalar_multiplier,
    dirac_apply,
    dirac_inverse_kernel,
    dirac_inverse_spectral,
    dirac_kernel,
    green_kernel,
    standard_symbols,
)

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "NormReport",
    "ScalarField",
    "SpinorField",
    "apply_matrix",
    "apply_matrix_multiplier",
    "apply_scalar_multiplier",
    "bump",
    "dirac_apply",
    "dirac_inverse_kernel",
    "dirac_inverse_spectral",
    "dirac_kernel",
    "dirac_matrices",
    "dirac_sobolev_norm",
    "dirac_symbol",
    "dsf1_load",
    "dsf1_store",
    "fft_forward",
    "fft_inverse",
    "gaussian",
    "green_kernel",
    "inverse_symbol",
    "local_hardy_norm",
    "lp_norm",
    "make_grid",
    "mollified_delta",
    "norm_report",
    "random_bandlimited",
    "rescale_field",
    "sample",
    "sobolev_norm",
    "standard_symbols",
    "vec_p_norm",
]
