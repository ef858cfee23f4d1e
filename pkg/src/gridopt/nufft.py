"""Evaluation step: gridding convolution, FFT stage and the direct oracle.

The forward map approximates the nonuniform DFT

    y(x) = sum_n u_n exp(-2 pi i x t_n),   x in [-1/2, 1/2),

by resampling the signal onto a uniform grid of length ``floor(gamma * N)``
with a compact kernel, applying an FFT-type transform and multiplying by a
deapodization table.  ``nudft_direct`` is the exact ``O(M N)`` reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.interpolate import CubicSpline

from .slepian import KernelTable
from .spectral import czt, frequency_grid

if TYPE_CHECKING:  # pragma: no cover
    from .error_shape import DeapodizationTable

__all__ = [
    "NonuniformSignal",
    "NonuniformSignal2D",
    "Spectrum",
    "Spectrum2D",
    "KernelLookup",
    "build_lookup",
    "grid_signal",
    "nufft_forward",
    "nudft_direct",
    "nufft2d_forward",
    "nudft2d_direct",
]


@dataclass(frozen=True)
class NonuniformSignal:
    """Complex amplitudes paired with nonuniform real sample times."""

    amplitudes: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amplitudes, dtype=complex)
        t = np.ascontiguousarray(self.times, dtype=float)
        if amp.ndim != 1 or t.ndim != 1 or amp.size != t.size:
            raise ValueError("amplitudes and times must be 1-D with equal length")
        if not np.all(np.isfinite(t)):
            raise ValueError("times must be finite")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "times", t)

    def __len__(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class NonuniformSignal2D:
    amplitudes: np.ndarray
    times_x: np.ndarray
    times_y: np.ndarray

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amplitudes, dtype=complex)
        tx = np.ascontiguousarray(self.times_x, dtype=float)
        ty = np.ascontiguousarray(self.times_y, dtype=float)
        if not (amp.ndim == tx.ndim == ty.ndim == 1 and amp.size == tx.size == ty.size):
            raise ValueError("amplitudes, times_x and times_y must be 1-D with equal length")
        if not (np.all(np.isfinite(tx)) and np.all(np.isfinite(ty))):
            raise ValueError("times must be finite")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "times_x", tx)
        object.__setattr__(self, "times_y", ty)

    def __len__(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class Spectrum:
    """Spectrum samples on ``x_m = -1/2 + m/M``."""

    M: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=complex)
        if vals.size != self.M:
            raise ValueError("values length must equal M")
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return frequency_grid(self.M)


@dataclass(frozen=True)
class Spectrum2D:
    M: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=complex)
        if vals.shape != (self.M, self.M):
            raise ValueError("values must be an M-by-M array")
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return frequency_grid(self.M)


class KernelLookup:
    """Natural cubic-spline interpolant of a kernel table.

    Reproduces the table exactly at the knots and evaluates to zero outside
    ``[-W, W]`` (the last knot sits at ``W - 1/D``; the sliver beyond it is
    treated as outside the support).
    """

    def __init__(self, kernel: KernelTable):
        if kernel.n_samples < 4:
            raise ValueError("kernel table too short for cubic splines (need >= 4 knots)")
        nodes = kernel.nodes
        self.W = kernel.W
        self._lo = nodes[0]
        self._hi = nodes[-1]
        self._real = CubicSpline(nodes, kernel.samples.real, bc_type="natural")
        self._imag = CubicSpline(nodes, kernel.samples.imag, bc_type="natural")

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 0
        pts = np.atleast_1d(pts)
        out = np.zeros(pts.shape, dtype=complex)
        inside = (pts >= self._lo) & (pts <= self._hi)
        if np.any(inside):
            sel = pts[inside]
            out[inside] = self._real(sel) + 1j * self._imag(sel)
        return out[0] if scalar else out


def build_lookup(kernel: KernelTable) -> KernelLookup:
    """Cubic-spline lookup for fast off-grid kernel evaluation."""
    return KernelLookup(kernel)


def grid_signal(
    signal: NonuniformSignal,
    lookup: KernelLookup,
    gamma: float,
    grid_len: int,
) -> np.ndarray:
    """Resample onto a uniform grid: ``u*_k = sum_n u_n C(k - gamma t_n)``.

    Only the at most ``2W+1`` integer offsets inside
    ``[gamma t_n - W, gamma t_n + W]`` contribute per sample; indices are
    wrapped modulo ``grid_len``.
    """
    if grid_len < 1:
        raise ValueError("grid_len must be >= 1")
    W = lookup.W
    scaled = gamma * signal.times
    base = np.floor(scaled).astype(np.int64)
    out = np.zeros(grid_len, dtype=complex)
    for j in range(-W, W + 1):
        k = base + j
        vals = lookup(k - scaled)
        np.add.at(out, np.mod(k, grid_len), signal.amplitudes * vals)
    return out


def nufft_forward(
    signal: NonuniformSignal,
    lookup: KernelLookup,
    h: "DeapodizationTable",
    M: int,
    gamma: float,
    grid_len: int | None = None,
) -> Spectrum:
    """Gridding + FFT approximation of the nonuniform DFT.

    Computes ``h(x_m) * sum_{k < grid_len} u*_k exp(-2 pi i x_m k / gamma)``.
    The grid origin at ``x = -1/2`` turns the padded FFT into a chirp
    Z-transform with a half-turn pre-twist.  ``grid_len`` defaults to
    ``floor(gamma * N)``; pass ``floor(gamma * extent)`` when the time extent
    differs from the sample count.
    """
    if h.M != M:
        raise ValueError(f"deapodization grid ({h.M}) does not match M ({M})")
    if grid_len is None:
        grid_len = max(1, int(np.floor(gamma * len(signal))))
    resampled = grid_signal(signal, lookup, gamma, grid_len)
    pre = resampled * np.exp(1j * np.pi * np.arange(grid_len) / gamma)
    vals = czt(pre, M, np.exp(-2j * np.pi / (M * gamma)))
    return Spectrum(M, h.values * vals)


def nudft_direct(signal: NonuniformSignal, M: int) -> Spectrum:
    """Exact nonuniform DFT, ``O(M N)``; the ground truth for benchmarks."""
    x = frequency_grid(M)
    u = signal.amplitudes
    t = signal.times
    out = np.zeros(M, dtype=complex)
    # Blockwise to bound the phase-matrix size for long signals.
    block = max(1, (1 << 22) // max(M, 1))
    for lo in range(0, t.size, block):
        hi = min(lo + block, t.size)
        out += np.exp(-2j * np.pi * np.outer(x, t[lo:hi])) @ u[lo:hi]
    return Spectrum(M, out)


def nufft2d_forward(
    samples: NonuniformSignal2D,
    lookup_x: KernelLookup,
    lookup_y: KernelLookup,
    h2d: np.ndarray,
    M: int,
    gamma: float,
    grid_len: int | None = None,
) -> Spectrum2D:
    """Separable 2-D gridding + FFT.

    The kernel is the product ``C(u, v) = C_x(u) C_y(v)`` and the correction
    the outer product ``h2d[a, b] = h_x(x_a) h_y(x_b)``.  ``grid_len`` is the
    per-axis resampling grid length and defaults to ``floor(gamma * N)`` with
    ``N`` the number of samples; callers with a known time-domain extent
    (e.g. an image side length) should pass ``floor(gamma * extent)``.
    """
    h2d = np.asarray(h2d, dtype=complex)
    if h2d.shape != (M, M):
        raise ValueError("h2d must be an M-by-M array")
    if lookup_x.W != lookup_y.W:
        raise ValueError("axis lookups must share the same support half-width")
    n = len(samples)
    G = int(np.floor(gamma * n)) if grid_len is None else int(grid_len)
    if G < 1:
        raise ValueError("resampling grid is empty")
    W = lookup_x.W
    P = 2 * W + 1
    sx = gamma * samples.times_x
    sy = gamma * samples.times_y
    bx = np.floor(sx).astype(np.int64)
    by = np.floor(sy).astype(np.int64)
    offs = np.arange(-W, W + 1)
    kx = bx[:, None] + offs[None, :]
    ky = by[:, None] + offs[None, :]
    wx = lookup_x(kx - sx[:, None])
    wy = lookup_y(ky - sy[:, None])
    contrib = samples.amplitudes[:, None, None] * wx[:, :, None] * wy[:, None, :]
    flat_idx = (np.mod(kx, G)[:, :, None] * G + np.mod(ky, G)[:, None, :]).reshape(-1)
    grid = np.zeros(G * G, dtype=complex)
    np.add.at(grid, flat_idx, contrib.reshape(-1))
    grid = grid.reshape(G, G)

    twist = np.exp(1j * np.pi * np.arange(G) / gamma)
    ratio = np.exp(-2j * np.pi / (M * gamma))
    along_x = czt((grid * twist[:, None]).T, M, ratio).T  # transform axis 0
    vals = czt(along_x * twist[None, :], M, ratio)  # transform axis 1
    return Spectrum2D(M, h2d * vals)


def nudft2d_direct(samples: NonuniformSignal2D, M: int) -> Spectrum2D:
    """Exact 2-D nonuniform DFT on the ``M x M`` frequency grid."""
    x = frequency_grid(M)
    ex = np.exp(-2j * np.pi * np.outer(x, samples.times_x))
    ey = np.exp(-2j * np.pi * np.outer(x, samples.times_y))
    return Spectrum2D(M, (ex * samples.amplitudes[None, :]) @ ey.T)
