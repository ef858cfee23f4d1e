"""Discrete Slepian basis and baseline gridding kernels.

A gridding kernel lives on the interval ``[-W, W]`` and is stored as a table
of ``2*W*D`` complex samples on the uniform grid ``nu_n = -W + n/D``.  All
kernels are normalised to unit norm in the ``dnu``-weighted discrete L2 sense,
``dnu * sum(|C|^2) == 1`` with ``dnu = 1/D``, so that the discrete norm agrees
with the continuous one as ``D`` grows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import windows

__all__ = [
    "SlepianBasis",
    "KernelTable",
    "dpss_basis",
    "pswf_kernel",
    "kaiser_bessel_kernel",
    "kb_default_beta",
]

# Concentration eigenvalues decay like exp(-c*l) and fall below double
# precision long before l reaches typical truncation orders.  Entries that
# cannot be resolved are replaced by a strictly decreasing geometric floor so
# the documented ordering 1 > lam_0 > ... > lam_L > 0 always holds.
_EIGENVALUE_FLOOR_RATIO = 0.1


@dataclass(frozen=True)
class SlepianBasis:
    """First ``L+1`` discrete prolate spheroidal sequences on a uniform grid.

    Attributes
    ----------
    n_samples : int
        Grid length (equals ``2*W*D`` when used with a :class:`KernelTable`).
    half_bandwidth_product : float
        Dimensionless time half-bandwidth product of the sequences.
    columns : ndarray, shape (n_samples, n_basis)
        Column ``l`` is the order-``l`` sequence, orthonormal under the
        ``dnu``-weighted inner product with ``dnu = 2*nw/n_samples``.
    eigenvalues : ndarray, shape (n_basis,)
        Concentration ratios, strictly decreasing inside ``(0, 1)``.
    """

    n_samples: int
    half_bandwidth_product: float
    columns: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n_basis(self) -> int:
        return self.columns.shape[1]

    @property
    def sample_step(self) -> float:
        """Grid step ``dnu`` implied by the bandwidth convention."""
        return 2.0 * self.half_bandwidth_product / self.n_samples


@dataclass(frozen=True)
class KernelTable:
    """Sampled gridding kernel on ``nu_n = -W + n/D``, ``n = 0..2*W*D-1``."""

    W: int
    D: int
    samples: np.ndarray

    def __post_init__(self):
        if self.W < 1 or self.D < 1:
            raise ValueError("W and D must be positive integers")
        samples = np.ascontiguousarray(self.samples, dtype=complex)
        if samples.ndim != 1 or samples.size != 2 * self.W * self.D:
            raise ValueError(
                f"expected {2 * self.W * self.D} samples, got {samples.size}"
            )
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return 2 * self.W * self.D

    @property
    def dnu(self) -> float:
        return 1.0 / self.D

    @property
    def nodes(self) -> np.ndarray:
        return -self.W + np.arange(self.n_samples) / self.D

    def norm(self) -> float:
        """dnu-weighted discrete L2 norm."""
        return float(np.sqrt(self.dnu * np.sum(np.abs(self.samples) ** 2)))

    def normalized(self) -> "KernelTable":
        nrm = self.norm()
        if nrm == 0.0 or not np.isfinite(nrm):
            raise ValueError("cannot normalise a zero or non-finite kernel")
        return KernelTable(self.W, self.D, self.samples / nrm)

    def as_dict(self) -> dict:
        return {
            "W": self.W,
            "D": self.D,
            "samples": [[float(v.real), float(v.imag)] for v in self.samples],
        }

    @staticmethod
    def from_dict(data: dict) -> "KernelTable":
        try:
            W = int(data["W"])
            D = int(data["D"])
            pairs = data["samples"]
            samples = np.array([complex(re, im) for re, im in pairs])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed kernel table: {exc}") from exc
        return KernelTable(W, D, samples)


def _fix_signs(columns: np.ndarray) -> np.ndarray:
    """Deterministic polarity: even orders have positive mean, odd orders a
    positive leading lobe."""
    cols = columns.copy()
    n = cols.shape[0]
    thresh = max(1e-7, 1.0 / n)
    for l in range(cols.shape[1]):
        col = cols[:, l]
        if l % 2 == 0:
            if col.sum() < 0:
                cols[:, l] = -col
        else:
            big = np.nonzero(np.abs(col) > thresh * np.abs(col).max())[0]
            lead = big[0] if big.size else 0
            if col[lead] < 0:
                cols[:, l] = -col
    return cols


def _enforce_decreasing(eigenvalues: np.ndarray) -> np.ndarray:
    lam = np.asarray(eigenvalues, dtype=float).copy()
    lam[0] = min(lam[0], np.nextafter(1.0, 0.0))
    if lam[0] <= 0.0:
        raise RuntimeError("leading concentration eigenvalue is not positive")
    for l in range(1, lam.size):
        if not (0.0 < lam[l] < lam[l - 1]):
            lam[l] = lam[l - 1] * _EIGENVALUE_FLOOR_RATIO
    return lam


def dpss_basis(n_samples: int, half_bandwidth_product: float, n_basis: int) -> SlepianBasis:
    """Build the first ``n_basis`` discrete Slepian sequences.

    The sequences are computed from the symmetric tridiagonal formulation,
    which is numerically stable, and rescaled so the columns are orthonormal
    under the ``dnu``-weighted inner product (``dnu = 2*nw/n_samples``).

    Parameters
    ----------
    n_samples : int
        Length of the sequences.
    half_bandwidth_product : float
        Time half-bandwidth product ``nw``; must satisfy
        ``0 < nw < n_samples/2``.
    n_basis : int
        Number of sequences (orders ``0 .. n_basis-1``).
    """
    if n_basis < 1 or n_basis > n_samples:
        raise ValueError("n_basis must be in [1, n_samples]")
    if not (0.0 < half_bandwidth_product < n_samples / 2.0):
        raise ValueError("half_bandwidth_product must be in (0, n_samples/2)")
    try:
        with warnings.catch_warnings():
            # High orders are unresolvable at double precision; the ratio
            # floor below handles them, so the library warning is noise here.
            warnings.simplefilter("ignore")
            tapers, ratios = windows.dpss(
                n_samples,
                half_bandwidth_product,
                Kmax=n_basis,
                return_ratios=True,
            )
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"Slepian eigendecomposition failed: {exc}") from exc
    tapers = np.atleast_2d(tapers)
    ratios = np.atleast_1d(ratios)
    dnu = 2.0 * half_bandwidth_product / n_samples
    columns = _fix_signs(tapers.T) / np.sqrt(dnu)
    return SlepianBasis(
        n_samples=int(n_samples),
        half_bandwidth_product=float(half_bandwidth_product),
        columns=columns,
        eigenvalues=_enforce_decreasing(ratios),
    )


def pswf_kernel(W: int, D: int, basis: SlepianBasis) -> KernelTable:
    """Normalised order-0 Slepian sequence as a gridding kernel."""
    if basis.n_samples != 2 * W * D:
        raise ValueError(
            f"basis has {basis.n_samples} samples, kernel grid needs {2 * W * D}"
        )
    return KernelTable(W, D, basis.columns[:, 0].astype(complex)).normalized()


def kaiser_bessel_kernel(W: int, D: int, beta: float) -> KernelTable:
    """Kaiser-Bessel window on ``[-W, W]``, normalised.

    The window argument is measured from the centre of the sample grid
    (half a sample off ``nu = 0``), so the table is exactly symmetric under
    index reversal, matching the symmetry of the Slepian columns.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    n = 2 * W * D
    u = (-W + np.arange(n) / D) + 0.5 / D
    vals = np.i0(beta * np.sqrt(1.0 - (u / W) ** 2)) / np.i0(beta)
    return KernelTable(W, D, vals.astype(complex)).normalized()


def kb_default_beta(W: int, gamma: float) -> float:
    """Default Kaiser-Bessel shape parameter for support ``[-W, W]``.

    Uses the closed-form choice of Beatty, Nishimura and Pauly (IEEE TMI 24,
    2005) for min-max optimised gridding, with the kernel width expressed in
    grid cells (``2*W``) and oversampling ``gamma``:

        beta = pi * sqrt((2W)^2 (gamma - 1/2)^2 / gamma^2 - 0.8)

    Deterministic, increasing in ``W`` at fixed ``gamma``.
    """
    if W < 1:
        raise ValueError("W must be >= 1")
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    width = 2.0 * W
    arg = width**2 * (gamma - 0.5) ** 2 / gamma**2 - 0.8
    return float(np.pi * np.sqrt(max(arg, 1e-12)))
