import numpy as np
import pytest

from gridopt import (
    KernelTable,
    dpss_basis,
    ell_direct,
    empirical_operator_norm_sq,
    lambda_and_h,
    shift_kernel,
)

from _util import random_kernel, rect_kernel, tapered_kernel


def test_rect_kernel_closed_form():
    # Triangle lags make the denominator exactly one, so Lambda is
    # 1 - |discrete FT|^2.  Against the continuum 1 - sinc^2 the residual is
    # the rectangle-rule floor, about (pi x / D)^2 / 3 * sinc^2 at the band
    # edge: ~8e-5 at D=64, falling to ~5e-6 at D=256.
    shape64, _ = lambda_and_h(rect_kernel(64), 1024)
    expected = 1.0 - np.sinc(shape64.x) ** 2
    assert np.abs(shape64.values - expected).max() < 1e-4
    shape256, _ = lambda_and_h(rect_kernel(256), 1024)
    assert np.abs(shape256.values - expected).max() < 1e-5


def test_rect_kernel_zero_at_dc():
    shape, _ = lambda_and_h(rect_kernel(64), 1024)
    assert shape.values[512] < 1e-6


def test_triangle_kernel_closed_form():
    # second analytic oracle, this one with an x-dependent denominator:
    # unit-norm triangle on [-1, 1] has lag ratios a(+-1)/a(0) = 1/4, so
    # Lambda(x) = 1 - 1.5 sinc^4(x) / (1 + cos(2 pi x)/2).
    def build(D):
        nodes = -1 + np.arange(2 * D) / D
        tri = np.maximum(1.0 - np.abs(nodes), 0.0).astype(complex)
        return KernelTable(1, D, tri).normalized()

    x = lambda_and_h(build(64), 1024)[0].x
    expected = 1.0 - 1.5 * np.sinc(x) ** 4 / (1.0 + 0.5 * np.cos(2 * np.pi * x))
    dev64 = np.abs(lambda_and_h(build(64), 1024)[0].values - expected).max()
    dev256 = np.abs(lambda_and_h(build(256), 1024)[0].values - expected).max()
    assert dev64 < 2e-4      # rectangle-rule floor, as for the rect kernel
    assert dev256 < 1e-5     # and it converges ~quadratically in D


def test_zoom_identity_on_refined_grid():
    rng = np.random.default_rng(0)
    kernel = random_kernel(2, 32, rng)
    M = 128
    lam2, _ = lambda_and_h(kernel, M, 2.0)
    lam1, _ = lambda_and_h(kernel, 2 * M, 1.0)
    idx = M // 2 + np.arange(M)
    assert np.abs(lam2.values - lam1.values[idx]).max() < 1e-10


def test_lambda_values_in_unit_interval():
    rng = np.random.default_rng(1)
    for _ in range(100):
        kernel = random_kernel(int(rng.integers(1, 4)), 12, rng)
        shape, _ = lambda_and_h(kernel, 128)
        assert np.all(shape.values >= 0.0)
        assert np.all(shape.values <= 1.0)
        assert not shape.degenerate.any()


def test_lambda_positivity_on_average():
    rng = np.random.default_rng(2)
    for _ in range(30):
        kernel = random_kernel(2, 16, rng)
        shape, _ = lambda_and_h(kernel, 128)
        assert shape.values.mean() > 0.0


@pytest.mark.parametrize("W", [1, 2, 3])
def test_lambda_mean_lower_bound(W):
    rng = np.random.default_rng(3 + W)
    lam0 = dpss_basis(2 * W * 32, float(W), 1).eigenvalues[0]
    bound = (1.0 - lam0) / (4 * W + 1) - 1e-4
    for _ in range(30):
        kernel = random_kernel(W, 32, rng)
        shape, _ = lambda_and_h(kernel, 256)
        assert shape.values.mean() >= bound


def test_lambda_scale_invariance():
    rng = np.random.default_rng(7)
    kernel = random_kernel(2, 24, rng)
    base, _ = lambda_and_h(kernel, 128)
    # Real power-of-two scalings cancel exactly in the normalisation, so the
    # shape is bit-identical; other scalars agree to roundoff.
    for alpha in (2.0, 0.5, 1024.0):
        scaled = KernelTable(kernel.W, kernel.D, alpha * kernel.samples)
        shape, _ = lambda_and_h(scaled, 128)
        assert np.array_equal(shape.values, base.values)
    for alpha in (3.0, 1j, 2.7 - 1.3j):
        scaled = KernelTable(kernel.W, kernel.D, alpha * kernel.samples)
        shape, _ = lambda_and_h(scaled, 128)
        assert np.abs(shape.values - base.values).max() < 1e-12


def test_shift_kernel_identity_and_norm():
    rng = np.random.default_rng(8)
    kernel = random_kernel(2, 16, rng)
    same = shift_kernel(kernel, 0.0)
    assert np.array_equal(same.samples, kernel.samples)
    shifted = shift_kernel(kernel, 0.3123)
    assert abs(shifted.norm() - kernel.norm()) < 1e-12


def test_shift_property_on_grid():
    rng = np.random.default_rng(9)
    M = 2048
    x0 = 0.25
    for _ in range(5):
        kernel = random_kernel(2, 16, rng)
        lam, _ = lambda_and_h(kernel, M)
        lam_shifted, _ = lambda_and_h(shift_kernel(kernel, x0), M)
        # compare where both x and x - x0 lie in [-1/2, 1/2)
        lo = M // 4
        dev = np.abs(lam_shifted.values[lo:] - lam.values[: M - lo]).max()
        assert dev < 1e-8


def test_ell_direct_zero_h_is_one():
    kernel = rect_kernel(16)
    assert ell_direct(kernel, 0.0, 0.3, 1.0, quad_points=64) == 1.0


def test_ell_direct_at_optimal_h_equals_lambda():
    rng = np.random.default_rng(10)
    for W, gamma in ((1, 1.0), (2, 1.0), (2, 2.0)):
        kernel = random_kernel(W, 64, rng)
        shape, h = lambda_and_h(kernel, 256, gamma)
        for m in rng.integers(0, 256, size=4):
            val = ell_direct(kernel, h.values[m], shape.x[m], gamma)
            assert abs(val - shape.values[m]) < 1e-9


def test_ell_direct_optimal_h_is_minimum():
    rng = np.random.default_rng(11)
    kernel = random_kernel(2, 64, rng)
    shape, h = lambda_and_h(kernel, 128)
    m = 37
    base = ell_direct(kernel, h.values[m], shape.x[m])
    for _ in range(50):
        delta = 10 ** rng.uniform(-6, -1) * (rng.normal() + 1j * rng.normal())
        perturbed = ell_direct(kernel, h.values[m] + delta, shape.x[m])
        assert perturbed >= base - 1e-9


def test_empirical_integer_times_rect_kernel():
    kernel = rect_kernel(64)
    times = np.arange(16, dtype=float)
    val = empirical_operator_norm_sq(kernel, 1.0 + 0j, 0.0, 1.0, times)
    assert val < 1e-12


def test_empirical_matches_ell_direct():
    rng = np.random.default_rng(12)
    for _ in range(3):
        kernel = tapered_kernel(2, 32, rng)
        shape, h = lambda_and_h(kernel, 64)
        m = int(rng.integers(0, 64))
        times = rng.uniform(0, 500.0, size=100_000)
        emp = empirical_operator_norm_sq(kernel, h.values[m], shape.x[m], 1.0, times)
        ref = ell_direct(kernel, h.values[m], shape.x[m], quad_points=4096)
        assert abs(emp - ref) < 0.05 * abs(ref)


def test_empirical_deviation_shrinks_with_sample_count():
    # Monte-Carlo half-power law: the median deviation over seeds should fall
    # by roughly sqrt(1e5/1e3) = 10 between N = 1e3 and N = 1e5.
    rng = np.random.default_rng(13)
    kernel = tapered_kernel(2, 32, rng)
    shape, h = lambda_and_h(kernel, 64)
    m = 20
    ref = ell_direct(kernel, h.values[m], shape.x[m], quad_points=4096)
    devs = {1000: [], 100_000: []}
    for seed in range(20):
        local = np.random.default_rng(seed)
        for n in devs:
            times = local.uniform(0, 1000.0, size=n)
            emp = empirical_operator_norm_sq(kernel, h.values[m], shape.x[m], 1.0, times)
            devs[n].append(abs(emp - ref))
    ratio = np.median(devs[1000]) / np.median(devs[100_000])
    assert 2.5 < ratio < 40.0


def test_empirical_requires_times():
    with pytest.raises(ValueError):
        empirical_operator_norm_sq(rect_kernel(16), 1.0, 0.0, 1.0, np.array([]))


def test_degenerate_denominator_is_flagged():
    # W = 1, D = 1, samples (1, -1): the periodised PSD is 1 - cos(2 pi x),
    # which vanishes at x = 0, so the DC bin must be zeroed and flagged.
    kernel = KernelTable(1, 1, np.array([1.0, -1.0], dtype=complex))
    shape, h = lambda_and_h(kernel, 8, 1.0)
    dc = 4  # x = 0
    assert shape.degenerate[dc] and h.degenerate[dc]
    assert shape.values[dc] == 0.0 and h.values[dc] == 0.0
    others = np.arange(8) != dc
    assert not shape.degenerate[others].any()
    assert np.all(shape.values[others] <= 1.0)
