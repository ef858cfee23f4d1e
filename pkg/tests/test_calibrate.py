import numpy as np
import pytest

from gridopt import (
    CalibrationConfig,
    coefficients_to_kernel,
    dpss_basis,
    kaiser_bessel_kernel,
    kb_default_beta,
    kernel_to_coefficients,
    lambda_and_h,
    optimize_kernel,
    pswf_kernel,
    scalarize,
    shift_kernel,
    target_shape,
)

from _util import random_kernel


def test_half_step_target():
    eta = target_shape("half_step", (1e-7, 1e-2), 256)
    assert np.all(eta.values[eta.x < 0] == 1e-2)
    assert np.all(eta.values[eta.x >= 0] == 1e-7)


def test_notch_target_minimum_at_center():
    eta = target_shape("notch", (0.25, 0.1, 1e-6, 0.5), 512)
    m_star = np.argmin(np.abs(eta.x - 0.25))
    assert eta.values[m_star] == eta.values.min() == 1e-6
    assert eta.values.max() == 0.5


def test_multi_notch_target_minima_at_centers():
    centers = (-0.3, 0.25, 0.4)
    eta = target_shape("multi_notch", (0.08, 1e-7, 1e-2) + centers, 2048)
    floor_bins = np.nonzero(eta.values == 1e-7)[0]
    # floor region splits into one contiguous run per requested center
    runs = np.split(floor_bins, np.nonzero(np.diff(floor_bins) > 1)[0] + 1)
    assert len(runs) == 3
    for run, center in zip(runs, sorted(centers)):
        mids = eta.x[run]
        assert mids.min() <= center <= mids.max()


def test_target_validation():
    with pytest.raises(ValueError):
        target_shape("notch", (0.25, 0.1), 64)
    with pytest.raises(ValueError):
        target_shape("notch", (0.25, 0.1, -1.0, 0.5), 64)
    with pytest.raises(ValueError):
        target_shape("bogus", (1.0,), 64)
    with pytest.raises(ValueError):
        target_shape("custom", np.ones(5), 64)


def test_scalarize_zero_residual():
    eta = target_shape("half_step", (0.1, 0.2), 64)
    assert scalarize(eta, eta, rho=10.0, p=1.0) == 0.0


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_scalarize_constant_offsets(p):
    rng = np.random.default_rng(0)
    eta = np.abs(rng.normal(size=128)) + 0.5
    rho, c = 7.0, 0.3
    above = scalarize(eta + c, eta, rho, p)
    assert abs(above - (rho - 1.0) * c**p) < 1e-12
    below = scalarize(eta - c, eta, rho, p)
    assert abs(below - (-(c**p))) < 1e-12


def test_scalarize_strongly_monotone():
    rng = np.random.default_rng(1)
    for _ in range(300):
        n = 64
        eta = np.abs(rng.normal(size=n))
        f = rng.normal(size=n)
        bump = np.abs(rng.normal(size=n)) * (rng.uniform(size=n) < 0.5)
        if not bump.any():
            bump[int(rng.integers(0, n))] = 0.1
        g = f + bump
        rho = 1.0 + 10 ** rng.uniform(-3, 3)
        p = float(rng.choice([1.0, 2.0]))
        assert scalarize(f, eta, rho, p) < scalarize(g, eta, rho, p)


def test_scalarize_rho_threshold():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = 64
        eta = np.abs(rng.normal(size=n)) + 0.5
        f = eta + rng.normal(size=n)
        pos = np.maximum(f - eta, 0.0)
        neg = np.maximum(eta - f, 0.0)
        if not (pos.any() and neg.any()):
            continue
        p = float(rng.choice([1.0, 2.0]))
        threshold = 1.0 + np.sum(neg**p) / np.sum(pos**p)
        rho = threshold * 1.000001
        assert scalarize(f, eta, rho, p) > 0.0


def test_coefficient_round_trip():
    rng = np.random.default_rng(3)
    W, D, L = 2, 16, 7
    basis = dpss_basis(2 * W * D, W, L + 1)
    kernel = random_kernel(W, D, rng)
    c_re, c_im = kernel_to_coefficients(basis, kernel)
    rebuilt = coefficients_to_kernel(basis, c_re, c_im)
    c_re2, c_im2 = kernel_to_coefficients(basis, rebuilt)
    coeff = c_re + 1j * c_im
    coeff2 = c_re2 + 1j * c_im2
    # round trip recovers the projected coefficients up to global scale/phase
    scale = coeff2[np.argmax(np.abs(coeff))] / coeff[np.argmax(np.abs(coeff))]
    assert np.abs(coeff2 - scale * coeff).max() < 1e-10


def test_basis_column_projects_to_unit_vector():
    W, D = 1, 32
    basis = dpss_basis(2 * W * D, W, 4)
    kernel = pswf_kernel(W, D, basis)
    c_re, c_im = kernel_to_coefficients(basis, kernel)
    expected = np.zeros(4)
    expected[0] = 1.0
    assert np.abs(c_re - expected).max() < 1e-10
    assert np.abs(c_im).max() < 1e-10


def test_purely_imaginary_kernel_has_zero_real_coefficients():
    rng = np.random.default_rng(4)
    W, D = 1, 16
    basis = dpss_basis(2 * W * D, W, 3)
    kernel = random_kernel(W, D, rng)
    imag_kernel = type(kernel)(W, D, 1j * kernel.samples.real)
    c_re, _ = kernel_to_coefficients(basis, imag_kernel)
    assert np.abs(c_re).max() < 1e-14


def test_kaiser_bessel_compresses_in_slepian_basis():
    W, D, L = 2, 21, 35
    basis = dpss_basis(2 * W * D, W, L + 1)
    kernel = kaiser_bessel_kernel(W, D, kb_default_beta(W, 1.0))
    c_re, c_im = kernel_to_coefficients(basis, kernel)
    rebuilt = basis.columns @ c_re + 1j * (basis.columns @ c_im)
    residual = kernel.samples - rebuilt
    res_norm = np.sqrt(kernel.dnu * np.sum(np.abs(residual) ** 2))
    assert res_norm < 1e-6


def test_coefficients_to_kernel_scaling_invariance_and_zero_rejection():
    basis = dpss_basis(64, 1.0, 3)
    c_re = np.array([1.0, -0.4, 0.2])
    c_im = np.array([0.0, 0.3, 0.0])
    k1 = coefficients_to_kernel(basis, c_re, c_im)
    k3 = coefficients_to_kernel(basis, 3 * c_re, 3 * c_im)
    assert np.abs(k1.samples - k3.samples).max() < 1e-14
    with pytest.raises(ValueError):
        coefficients_to_kernel(basis, np.zeros(3), np.zeros(3))


def test_config_round_trip_and_validation():
    config = CalibrationConfig(W=2, seed=5, L=7, D=16, M=128, max_fun_evals=500)
    again = CalibrationConfig.from_dict(config.as_dict())
    assert again == config
    with pytest.raises(ValueError):
        CalibrationConfig.from_dict({"W": 2})
    with pytest.raises(ValueError):
        CalibrationConfig.from_dict({"W": 2, "seed": 1, "bogus": 3})
    with pytest.raises(ValueError):
        CalibrationConfig(W=2, seed=1, rho=0.5)


def _small_setup():
    config = CalibrationConfig(
        W=1, seed=11, L=4, D=16, M=64, max_fun_evals=400, restarts=2
    )
    target = target_shape("notch", (0.2, 0.15, 1e-6, 1e-2), config.M)
    basis = dpss_basis(2 * config.W * config.D, config.W, 1)
    init = shift_kernel(pswf_kernel(config.W, config.D, basis), 0.2)
    return config, target, init


def test_optimize_kernel_contracts():
    config, target, init = _small_setup()
    init_shape, _ = lambda_and_h(init, config.M, config.gamma)
    init_objective = scalarize(init_shape, target, config.rho, config.p)
    result = optimize_kernel(config, target, init)
    assert result.objective <= init_objective + 1e-12
    assert abs(result.kernel.norm() - 1.0) < 1e-10
    assert result.termination_reason in ("step_tolerance", "eval_budget")
    assert result.trace[0][0] == 1  # first evaluation is the initial guess
    values = [v for _, v in result.trace]
    assert all(b < a for a, b in zip(values, values[1:]))
    recomputed = scalarize(
        lambda_and_h(result.kernel, config.M, config.gamma)[0],
        target,
        config.rho,
        config.p,
    )
    assert abs(recomputed - result.objective) <= 1e-9 * max(abs(result.objective), 1.0)


def test_optimize_kernel_deterministic():
    config, target, init = _small_setup()
    first = optimize_kernel(config, target, init)
    second = optimize_kernel(config, target, init)
    assert np.array_equal(first.kernel.samples, second.kernel.samples)
    assert first.objective == second.objective
    assert first.trace == second.trace


def test_optimize_beats_unshifted_baseline_at_notch():
    config = CalibrationConfig(
        W=2, seed=3, L=8, D=16, M=256, max_fun_evals=1500, restarts=1
    )
    target = target_shape("notch", (0.25, 0.1, 1e-6, 1e-2), config.M)
    basis = dpss_basis(2 * config.W * config.D, config.W, 1)
    pswf = pswf_kernel(config.W, config.D, basis)
    init = shift_kernel(pswf, 0.25)
    result = optimize_kernel(config, target, init)
    m_star = np.argmin(np.abs(target.x - 0.25))
    baseline, _ = lambda_and_h(pswf, config.M, config.gamma)
    assert result.error_shape.values[m_star] < baseline.values[m_star]
