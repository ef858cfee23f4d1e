"""Spectral primitives shared by the error-shape and evaluation code.

Everything here follows the rectangle-rule discretisation of the kernel
integrals: integrals over ``[-W, W]`` become ``dnu``-weighted sums over the
table nodes ``nu_n = -W + n/D``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from .slepian import KernelTable

__all__ = [
    "NumericalConsistencyError",
    "AutocorrLags",
    "autocorrelation_lags",
    "czt",
    "periodized_psd",
    "kernel_ft_samples",
    "frequency_grid",
]


class NumericalConsistencyError(RuntimeError):
    """An internal identity that should hold numerically was violated."""


def frequency_grid(M: int) -> np.ndarray:
    """Uniform frequency grid ``x_m = -1/2 + m/M`` for ``m = 0..M-1``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return -0.5 + np.arange(M) / M


@dataclass(frozen=True)
class AutocorrLags:
    """Integer-lag autocorrelation of a kernel table.

    ``lags`` has length ``4*W - 1`` and holds ``a(beta)`` for
    ``beta = -(2W-1) .. 2W-1``.  The endpoint lags ``a(+-2W)`` vanish
    identically for kernels supported in ``[-W, W]`` and are not stored.
    """

    W: int
    lags: np.ndarray

    def __post_init__(self):
        lags = np.ascontiguousarray(self.lags, dtype=complex)
        if lags.size != 4 * self.W - 1:
            raise ValueError(f"expected {4 * self.W - 1} lags, got {lags.size}")
        object.__setattr__(self, "lags", lags)

    @property
    def betas(self) -> np.ndarray:
        return np.arange(-(2 * self.W - 1), 2 * self.W)

    def lag(self, beta: int) -> complex:
        if abs(beta) >= 2 * self.W:
            return 0.0 + 0.0j
        return complex(self.lags[2 * self.W - 1 + beta])


def autocorrelation_lags(kernel: KernelTable) -> AutocorrLags:
    """Rectangle-rule autocorrelation ``a(beta) = dnu * sum_k C_k conj(C_{k - beta*D})``.

    Out-of-range shifted samples count as zero.  Negative lags follow from
    Hermitian symmetry.
    """
    C = kernel.samples
    W, D, n = kernel.W, kernel.D, kernel.n_samples
    out = np.zeros(4 * W - 1, dtype=complex)
    for b in range(2 * W):
        kappa = b * D
        val = kernel.dnu * np.sum(C[kappa:] * np.conj(C[: n - kappa]))
        out[2 * W - 1 + b] = val
        if b > 0:
            out[2 * W - 1 - b] = np.conj(val)
    return AutocorrLags(W=W, lags=out)


def czt(x: np.ndarray, m: int, w_factor: complex) -> np.ndarray:
    """Chirp Z-transform ``X_k = sum_n x_n * w_factor**(n*k)`` for ``k < m``.

    Evaluated through the Bluestein factorisation (three FFTs of length
    ``O(n + m)``), so the cost is ``O((n+m) log(n+m))``.
    """
    x = np.asarray(x)
    if m < 1:
        raise ValueError("m must be >= 1")
    if abs(abs(w_factor) - 1.0) > 1e-12:
        raise ValueError("w_factor must lie on the unit circle")
    return scipy.signal.czt(x, m=m, w=w_factor, a=1.0)


def periodized_psd(lags: AutocorrLags, M: int, gamma: float) -> np.ndarray:
    """Periodised power spectral density ``sum_beta a(beta) e^{-2 pi i x_m beta / gamma}``.

    The result is real for Hermitian lags; the imaginary residue is checked
    against ``1e-8 * (1 + |Re|)`` and discarded.
    """
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    x = frequency_grid(M)
    phases = np.exp(-2j * np.pi * np.outer(x, lags.betas) / gamma)
    vals = phases @ lags.lags
    tol = 1e-8 * (1.0 + np.abs(vals.real))
    if np.any(np.abs(vals.imag) > tol):
        worst = float(np.abs(vals.imag).max())
        raise NumericalConsistencyError(
            f"periodised PSD has imaginary residue {worst:.3e}; lags are not Hermitian"
        )
    return vals.real


def kernel_ft_samples(kernel: KernelTable, M: int, gamma: float = 1.0) -> np.ndarray:
    """Rectangle-rule Fourier transform ``dnu * sum_n C_n e^{-2 pi i (x_m/gamma) nu_n}``.

    The sum is evaluated for all ``m`` at once with a chirp Z-transform: the
    node offset ``-W`` and the grid origin ``-1/2`` become pre/post phase
    twists around a CZT with ratio ``exp(-2 pi i / (M D gamma))``.
    """
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    C = kernel.samples
    D, W, n = kernel.D, kernel.W, kernel.n_samples
    x = frequency_grid(M)
    pre = C * np.exp(1j * np.pi * np.arange(n) / (D * gamma))
    spun = czt(pre, M, np.exp(-2j * np.pi / (M * D * gamma)))
    return kernel.dnu * spun * np.exp(2j * np.pi * x * W / gamma)
