"""Error shape of a gridding kernel and its optimal deapodization.

For a unit-norm kernel ``C`` the per-frequency error profile is

    Lambda(x) = 1 - |FT(C)(x/gamma)|^2 / sum_m |FT(C)(x/gamma + m)|^2,

attained by the deapodization ``h*(x) = conj(FT(C)(x/gamma)) / sum_m |...|^2``.
``Lambda(x)`` is the squared operator norm of the per-sample gridding error
averaged over fractional grid offsets, so it lies in ``[0, 1]`` and is
invariant under rescaling of the kernel.  The denominator is evaluated
through the integer-lag autocorrelation (Poisson summation), the numerator
through a chirp Z-transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nufft import build_lookup
from .slepian import KernelTable
from .spectral import (
    autocorrelation_lags,
    frequency_grid,
    kernel_ft_samples,
    periodized_psd,
)

__all__ = [
    "ErrorShape",
    "DeapodizationTable",
    "lambda_and_h",
    "shift_kernel",
    "ell_direct",
    "empirical_operator_norm_sq",
]

# Below this the periodised PSD is considered vanished and the corresponding
# frequency is flagged instead of divided by.
_DEN_FLOOR = 1e-300


@dataclass(frozen=True)
class ErrorShape:
    """``Lambda C`` sampled on ``x_m = -1/2 + m/M``; values in ``[0, 1]``."""

    M: int
    gamma: float
    values: np.ndarray
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.size != self.M:
            raise ValueError("values length must equal M")
        mask = self.degenerate
        mask = np.zeros(self.M, dtype=bool) if mask is None else np.ascontiguousarray(mask, dtype=bool)
        if mask.size != self.M:
            raise ValueError("degenerate mask length must equal M")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "degenerate", mask)

    @property
    def x(self) -> np.ndarray:
        return frequency_grid(self.M)


@dataclass(frozen=True)
class DeapodizationTable:
    """Optimal correction ``h*`` sampled on the same frequency grid."""

    M: int
    values: np.ndarray
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=complex)
        if vals.size != self.M:
            raise ValueError("values length must equal M")
        mask = self.degenerate
        mask = np.zeros(self.M, dtype=bool) if mask is None else np.ascontiguousarray(mask, dtype=bool)
        if mask.size != self.M:
            raise ValueError("degenerate mask length must equal M")
        if not np.all(np.isfinite(vals)):
            raise ValueError("deapodization values must be finite")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "degenerate", mask)

    @property
    def x(self) -> np.ndarray:
        return frequency_grid(self.M)


def lambda_and_h(
    kernel: KernelTable, M: int, gamma: float = 1.0
) -> tuple[ErrorShape, DeapodizationTable]:
    """Error shape and optimal deapodization of a kernel.

    The kernel is normalised first (the result is scale invariant), then

    * denominator: ``den[m] = sum_beta a(beta) e^{-2 pi i x_m beta / gamma}``
      from the rectangle-rule autocorrelation lags,
    * numerator: ``ft[m] = dnu * FT-sum of C`` at ``x_m / gamma`` via CZT,
    * ``Lambda[m] = 1 - |ft[m]|^2 / den[m]`` and ``h[m] = conj(ft[m]) / den[m]``.

    Frequencies where the denominator underflows are set to zero and flagged.
    Roundoff can push ``Lambda`` a few ulp outside ``[0, 1]``; it is clipped.
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    kernel = kernel.normalized()
    den = periodized_psd(autocorrelation_lags(kernel), M, gamma)
    ft = kernel_ft_samples(kernel, M, gamma)
    good = den > _DEN_FLOOR
    lam = np.zeros(M)
    hvals = np.zeros(M, dtype=complex)
    lam[good] = np.clip(1.0 - np.abs(ft[good]) ** 2 / den[good], 0.0, 1.0)
    hvals[good] = np.conj(ft[good]) / den[good]
    bad = ~good
    shape = ErrorShape(M=M, gamma=float(gamma), values=lam, degenerate=bad)
    deapod = DeapodizationTable(M=M, values=hvals, degenerate=bad.copy())
    return shape, deapod


def shift_kernel(kernel: KernelTable, x0: float) -> KernelTable:
    """Modulate the kernel so its error shape translates by ``x0``.

    Multiplies the samples by ``exp(2 pi i x0 nu_n)``; the norm is unchanged
    and, for ``gamma = 1``, ``Lambda(shifted)(x) = Lambda(original)(x - x0)``
    wherever both frequencies lie in ``[-1/2, 1/2)``.
    """
    phase = np.exp(2j * np.pi * x0 * kernel.nodes)
    return KernelTable(kernel.W, kernel.D, kernel.samples * phase)


def ell_direct(
    kernel: KernelTable,
    h_value: complex,
    x: float,
    gamma: float = 1.0,
    quad_points: int = 4096,
) -> float:
    """Average squared gridding error at frequency ``x`` for a given ``h``.

    Midpoint-rule quadrature of

        integral_0^1 |1 - h * sum_k C(k - v) e^{-2 pi i x (k - v) / gamma}|^2 dv

    over ``quad_points`` nodes, with ``k`` ranging over the ``2W+1`` integers
    touching the support.  The integrand is evaluated on the kernel's own
    sample lattice (``k - v`` rounded to the nearest table node, for both the
    kernel value and the phase), i.e. this integrates the same discrete
    kernel model that the spectral path transforms, which makes the optimality
    identity ``ell(h*) = Lambda(x)`` exact up to quadrature.  Quadrature is
    itself exact when ``quad_points`` is a multiple of ``D``.
    """
    if quad_points < 2:
        raise ValueError("quad_points must be >= 2")
    kernel = kernel.normalized()
    nodes = (np.arange(quad_points) + 0.5) / quad_points
    sums = _lattice_error_sums(kernel, nodes, x, gamma)
    return float(np.mean(np.abs(1.0 - h_value * sums) ** 2))


def empirical_operator_norm_sq(
    kernel: KernelTable,
    h_value: complex,
    x: float,
    gamma: float,
    times: np.ndarray,
) -> float:
    """Per-sample average of the squared gridding-error operator norm.

    Computes ``(1/N) sum_n |1 - h * sum_k C(k - {gamma t_n})
    e^{-2 pi i x (k - {gamma t_n}) / gamma}|^2`` where ``{.}`` is the
    fractional part.  The kernel is evaluated with the cubic-spline lookup,
    exactly as the gridding step does, so ``N`` times this quantity is the
    squared constant of the per-frequency error bound
    ``|y(x) - y*(x)| <= ||u||_2 * sqrt(N * ell_N)``.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("times must be nonempty")
    kernel = kernel.normalized()
    lookup = build_lookup(kernel)
    frac = np.mod(gamma * times, 1.0)
    ks = np.arange(-kernel.W, kernel.W + 1)
    taus = ks[None, :] - frac[:, None]
    sums = np.sum(lookup(taus) * np.exp(-2j * np.pi * x * taus / gamma), axis=1)
    return float(np.mean(np.abs(1.0 - h_value * sums) ** 2))


def _lattice_error_sums(kernel: KernelTable, offsets: np.ndarray, x: float, gamma: float) -> np.ndarray:
    """Inner sums of the error integrand on the kernel's sample lattice."""
    W, D, n = kernel.W, kernel.D, kernel.n_samples
    ks = np.arange(-W, W + 1)
    taus = ks[None, :] - offsets[:, None]
    idx = np.rint((taus + W) * D).astype(np.int64)
    inside = (idx >= 0) & (idx < n)
    idx_c = np.clip(idx, 0, n - 1)
    snapped = -W + idx_c / D
    vals = np.where(inside, kernel.samples[idx_c], 0.0)
    return np.sum(vals * np.exp(-2j * np.pi * x * snapped / gamma), axis=1)
