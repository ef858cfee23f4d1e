"""Target shapes, penalty scalarization and kernel optimization.

Kernels are optimised over their coefficients in a truncated Slepian basis.
The objective is the penalty scalarizing functional

    s(f) = -||f - eta||_p^p + rho * ||(f - eta)_+||_p^p,   rho > 1,

applied to ``f = Lambda(C)`` against a nonnegative target profile ``eta``.
For ``rho > 1`` the functional is strongly monotone for the pointwise
partial order, so minimisers are Pareto-efficient error shapes; minimisation
uses a derivative-free simplex search (the objective is nonsmooth for
``p = 1``) with the unit-norm constraint absorbed by normalising candidates
(the error shape is scale invariant).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize

from .error_shape import DeapodizationTable, ErrorShape, lambda_and_h, shift_kernel
from .slepian import (
    KernelTable,
    SlepianBasis,
    dpss_basis,
    kaiser_bessel_kernel,
    kb_default_beta,
    pswf_kernel,
)
from .spectral import frequency_grid

__all__ = [
    "TargetShape",
    "CalibrationConfig",
    "CalibrationResult",
    "target_shape",
    "scalarize",
    "coefficients_to_kernel",
    "kernel_to_coefficients",
    "optimize_kernel",
]

TARGET_KINDS = ("half_step", "notch", "multi_notch", "custom")

# Candidates whose objective cannot be evaluated (degenerate kernel, NaN)
# are rejected with this value; large enough to lose against any real
# objective, small enough not to overflow simplex arithmetic.
_REJECT = 1e30


@dataclass(frozen=True)
class TargetShape:
    """Desired nonnegative error profile ``eta`` on the frequency grid."""

    M: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.size != self.M:
            raise ValueError("values length must equal M")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("target values must be finite and nonnegative")
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return frequency_grid(self.M)


def _notch_profile(x: np.ndarray, center: float, width: float, floor: float, ceiling: float) -> np.ndarray:
    """Flat floor of half-width ``width/2`` with log-linear ramps of the same
    width up to the ceiling."""
    if width <= 0:
        raise ValueError("notch width must be positive")
    if not (0 < floor <= ceiling):
        raise ValueError("need 0 < floor <= ceiling")
    d = np.abs(x - center)
    half = width / 2.0
    ramp = np.clip((d - half) / half, 0.0, 1.0)
    blend = np.exp(np.log(floor) + ramp * (np.log(ceiling) - np.log(floor)))
    return np.where(ramp <= 0.0, floor, np.where(ramp >= 1.0, ceiling, blend))


def target_shape(kind: str, params, M: int) -> TargetShape:
    """Construct a target error profile on the ``M``-point frequency grid.

    Parameters by kind:

    * ``half_step``: ``(low, high)`` with ``eta = high`` for ``x < 0`` and
      ``eta = low`` for ``x >= 0``.
    * ``notch``: ``(center, width, floor, ceiling)``; flat floor inside
      ``|x - center| <= width/2``, log-linear blend to the ceiling over a
      further ``width/2``.
    * ``multi_notch``: ``(width, floor, ceiling, c1, c2, ...)``; pointwise
      minimum of the notches at the listed centers.
    * ``custom``: the ``M`` profile values themselves.
    """
    x = frequency_grid(M)
    params = np.asarray(params, dtype=float)
    if kind == "half_step":
        if params.size != 2:
            raise ValueError("half_step takes (low, high)")
        low, high = params
        if low < 0 or high < 0:
            raise ValueError("plateau levels must be nonnegative")
        vals = np.where(x < 0, high, low)
    elif kind == "notch":
        if params.size != 4:
            raise ValueError("notch takes (center, width, floor, ceiling)")
        vals = _notch_profile(x, *params)
    elif kind == "multi_notch":
        if params.size < 4:
            raise ValueError("multi_notch takes (width, floor, ceiling, centers...)")
        width, floor, ceiling = params[:3]
        centers = params[3:]
        vals = np.min(
            [_notch_profile(x, c, width, floor, ceiling) for c in centers], axis=0
        )
    elif kind == "custom":
        if params.size != M:
            raise ValueError(f"custom profile needs {M} values, got {params.size}")
        vals = params
    else:
        raise ValueError(f"unknown target kind {kind!r}; expected one of {TARGET_KINDS}")
    return TargetShape(M=M, values=vals)


def _profile_values(obj) -> np.ndarray:
    return np.asarray(getattr(obj, "values", obj), dtype=float)


def scalarize(lam, target, rho: float, p: float) -> float:
    """Penalty scalarization ``-||f - eta||_p^p + rho ||(f - eta)_+||_p^p``.

    Norms are discretised as ``dx``-weighted sums with ``dx = 1/M``, so the
    grid carries unit measure.  Accepts :class:`ErrorShape` /
    :class:`TargetShape` or plain arrays.
    """
    f = _profile_values(lam)
    eta = _profile_values(target)
    if f.shape != eta.shape:
        raise ValueError("profile grids do not match")
    if rho <= 1.0:
        raise ValueError("rho must be > 1")
    if p < 1.0:
        raise ValueError("p must be >= 1")
    dx = 1.0 / f.size
    diff = f - eta
    total = dx * np.sum(np.abs(diff) ** p)
    positive = dx * np.sum(np.maximum(diff, 0.0) ** p)
    return float(-total + rho * positive)


def coefficients_to_kernel(basis: SlepianBasis, c_real: np.ndarray, c_imag: np.ndarray) -> KernelTable:
    """Kernel ``B c_real + i B c_imag``, normalised to the unit sphere."""
    c_real = np.asarray(c_real, dtype=float)
    c_imag = np.asarray(c_imag, dtype=float)
    if c_real.size != basis.n_basis or c_imag.size != basis.n_basis:
        raise ValueError("coefficient vectors must have one entry per basis column")
    W, D = _basis_grid(basis)
    samples = basis.columns @ c_real + 1j * (basis.columns @ c_imag)
    if not np.any(samples):
        raise ValueError("all-zero coefficients give a degenerate kernel")
    return KernelTable(W, D, samples).normalized()


def kernel_to_coefficients(basis: SlepianBasis, kernel: KernelTable) -> tuple[np.ndarray, np.ndarray]:
    """dnu-weighted projection of a kernel onto the basis columns."""
    if basis.n_samples != kernel.n_samples:
        raise ValueError("basis and kernel grids do not match")
    coeff = kernel.dnu * (basis.columns.T @ kernel.samples)
    return coeff.real.copy(), coeff.imag.copy()


def _basis_grid(basis: SlepianBasis) -> tuple[int, int]:
    """Recover the (W, D) kernel grid a basis was built for."""
    W = int(round(basis.half_bandwidth_product))
    if W < 1 or abs(basis.half_bandwidth_product - W) > 1e-12:
        raise ValueError("basis half-bandwidth product is not an integer support half-width")
    if basis.n_samples % (2 * W) != 0:
        raise ValueError("basis length is incompatible with its bandwidth product")
    return W, basis.n_samples // (2 * W)


@dataclass(frozen=True)
class CalibrationConfig:
    """Parameters of one kernel calibration run."""

    W: int
    seed: int
    gamma: float = 1.0
    L: int = 35
    D: int = 21
    M: int = 2048
    p: float = 1.0
    rho: float = 1e16
    step_tol: float = 1e-16
    max_fun_evals: int = 1_000_000
    restarts: int = 3

    def __post_init__(self):
        if self.W < 1 or self.D < 1 or self.M < 2 or self.L < 0:
            raise ValueError("W, D, M must be positive and L nonnegative")
        if self.rho <= 1.0:
            raise ValueError("rho must be > 1")
        if self.p < 1.0:
            raise ValueError("p must be >= 1")
        if self.gamma < 1.0:
            raise ValueError("gamma must be >= 1")
        if self.max_fun_evals < 1 or self.restarts < 1:
            raise ValueError("max_fun_evals and restarts must be positive")

    def as_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "CalibrationConfig":
        known = {f for f in CalibrationConfig.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        missing = {"W", "seed"} - set(data)
        if missing:
            raise ValueError(f"config is missing required fields: {sorted(missing)}")
        coerced = dict(data)
        for key in ("W", "seed", "L", "D", "M", "max_fun_evals", "restarts"):
            if key in coerced:
                coerced[key] = int(coerced[key])
        for key in ("gamma", "p", "rho", "step_tol"):
            if key in coerced:
                coerced[key] = float(coerced[key])
        return CalibrationConfig(**coerced)


def _portfolio_kernels(config: CalibrationConfig, target: TargetShape):
    """Baseline kernels used as extra optimisation starts."""
    basis0 = dpss_basis(2 * config.W * config.D, config.W, 1)
    base = pswf_kernel(config.W, config.D, basis0)
    x0 = float(target.x[np.argmin(target.values)])
    yield shift_kernel(base, x0)
    yield base
    yield kaiser_bessel_kernel(config.W, config.D, kb_default_beta(config.W, config.gamma))


@dataclass(frozen=True)
class CalibrationResult:
    kernel: KernelTable
    h: DeapodizationTable
    error_shape: ErrorShape
    objective: float
    trace: list
    termination_reason: str
    eval_count: int = 0


def optimize_kernel(
    config: CalibrationConfig,
    target: TargetShape,
    init: KernelTable,
) -> CalibrationResult:
    """Minimise the scalarized error-shape objective over Slepian coefficients.

    Runs ``config.restarts`` Nelder-Mead searches over the ``2(L+1)`` real
    coefficients, sharing one evaluation budget split evenly between starts.
    The first start is the projection of ``init``; later starts come from a
    portfolio of kernels known to sit near good basins (the order-0 Slepian
    kernel modulated to the most demanding target frequency, the plain
    order-0 kernel, the default Kaiser-Bessel kernel) followed by seeded
    perturbations of ``init``.  The objective is nonsmooth, so the search is
    derivative free; candidates are normalised before evaluation and failed
    evaluations are rejected, not fatal.  Returns the best kernel seen, its
    error shape and deapodization, and a best-so-far objective trace.
    """
    if init.W != config.W or init.D != config.D:
        raise ValueError("initial kernel grid does not match the configuration")
    if target.M != config.M:
        raise ValueError("target grid does not match the configuration")
    basis = dpss_basis(2 * config.W * config.D, config.W, config.L + 1)
    c_re, c_im = kernel_to_coefficients(basis, init.normalized())
    x0 = np.concatenate([c_re, c_im])
    K = basis.n_basis

    state = {"best": np.inf, "best_x": x0.copy(), "evals": 0, "trace": []}

    def objective(xv: np.ndarray) -> float:
        state["evals"] += 1
        try:
            kern = coefficients_to_kernel(basis, xv[:K], xv[K:])
            shape, _ = lambda_and_h(kern, config.M, config.gamma)
            val = scalarize(shape, target, config.rho, config.p)
        except (ValueError, FloatingPointError):
            return _REJECT
        if not np.isfinite(val):
            return _REJECT
        if val < state["best"]:
            state["best"] = val
            state["best_x"] = np.asarray(xv, dtype=float).copy()
            state["trace"].append((state["evals"], val))
        return val

    rng = np.random.default_rng(config.seed)
    starts = [x0]
    for candidate in _portfolio_kernels(config, target):
        c_re_p, c_im_p = kernel_to_coefficients(basis, candidate)
        vec = np.concatenate([c_re_p, c_im_p])
        if len(starts) >= config.restarts:
            break
        if min(np.linalg.norm(vec - s) for s in starts) > 1e-9:
            starts.append(vec)
    sigma = 0.05 * max(float(np.linalg.norm(x0)) / np.sqrt(x0.size), 1e-6)
    while len(starts) < config.restarts:
        starts.append(x0 + sigma * rng.standard_normal(x0.size))
    share = max(1, config.max_fun_evals // len(starts))
    converged = []
    for start in starts:
        remaining = config.max_fun_evals - state["evals"]
        if remaining <= 0:
            converged.append(False)
            break
        outcome = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={
                "maxfev": min(share, remaining),
                "xatol": config.step_tol,
                "fatol": config.step_tol,
                "adaptive": True,
            },
        )
        converged.append(bool(outcome.success))
    reason = "step_tolerance" if all(converged) else "eval_budget"

    best_x = state["best_x"]
    kernel = coefficients_to_kernel(basis, best_x[:K], best_x[K:])
    shape, deapod = lambda_and_h(kernel, config.M, config.gamma)
    objective_value = scalarize(shape, target, config.rho, config.p)
    return CalibrationResult(
        kernel=kernel,
        h=deapod,
        error_shape=shape,
        objective=float(objective_value),
        trace=list(state["trace"]),
        termination_reason=reason,
        eval_count=int(state["evals"]),
    )
