"""gridopt: gridding-kernel calibration and evaluation for nonuniform FFT.

The package computes the per-frequency error shape of a gridding kernel and
its error-optimal deapodization, optimises kernels against user-specified
target error profiles over a discrete Slepian basis, and benchmarks the
results against Slepian and Kaiser-Bessel baselines in 1-D and separable 2-D.
"""

__version__ = "0.1.0"

from .slepian import (
    KernelTable,
    SlepianBasis,
    dpss_basis,
    kaiser_bessel_kernel,
    kb_default_beta,
    pswf_kernel,
)
from .spectral import (
    AutocorrLags,
    NumericalConsistencyError,
    autocorrelation_lags,
    czt,
    frequency_grid,
    kernel_ft_samples,
    periodized_psd,
)
from .error_shape import (
    DeapodizationTable,
    ErrorShape,
    ell_direct,
    empirical_operator_norm_sq,
    lambda_and_h,
    shift_kernel,
)
from .calibrate import (
    CalibrationConfig,
    CalibrationResult,
    TargetShape,
    coefficients_to_kernel,
    kernel_to_coefficients,
    optimize_kernel,
    scalarize,
    target_shape,
)
from .nufft import (
    KernelLookup,
    NonuniformSignal,
    NonuniformSignal2D,
    Spectrum,
    Spectrum2D,
    build_lookup,
    grid_signal,
    nudft2d_direct,
    nudft_direct,
    nufft2d_forward,
    nufft_forward,
)
from .bench import (
    Bench2dResult,
    BenchResult,
    MaeReport,
    RadialKspace,
    SignalSuite,
    default_target,
    density_compensation,
    error_map_2d,
    generate_signals,
    initial_kernel,
    mae,
    phantom,
    radial_kspace,
    run_bench,
    run_bench2d,
    weighted_l1,
    weights_from_target,
)

__all__ = [name for name in dir() if not name.startswith("_")]
