import numpy as np
import pytest

from naive import naive_loo_cv_error, naive_nw
from semiresp import (BandwidthSelectionFailed, EmptyCell, fit_cell_mean,
                      fit_kernel_mean, select_bandwidth_cv)
from semiresp.smoothing import CV_GRID_POINTS, CV_GRID_SPAN, silverman_bandwidth


def test_cell_mean_basic():
    sm = fit_cell_mean([(0, 2.0), (0, 4.0), (1, 10.0)])
    assert sm.evaluate(0) == 3.0
    assert sm.evaluate(1) == 10.0


def test_cell_mean_empty_cell_error():
    sm = fit_cell_mean([(0, 2.0), (0, 4.0), (1, 10.0)])
    with pytest.raises(EmptyCell) as exc:
        sm.evaluate(2)
    assert exc.value.code == 2.0


def test_cell_mean_constant():
    sm = fit_cell_mean([(c, 7.5) for c in (0, 1, 2, 0, 1)])
    for c in (0, 1, 2):
        assert sm.evaluate(c) == 7.5


def test_kernel_constant_cluster():
    rng = np.random.default_rng(0)
    xs = rng.normal(0, 0.1, 30)
    sm = fit_kernel_mean(list(zip(xs, [3.25] * 30)), h=0.5)
    assert sm.evaluate(0.05) == pytest.approx(3.25, abs=1e-12)


def test_kernel_symmetry_midpoint():
    sm = fit_kernel_mean([(-1.0, 0.0), (1.0, 1.0)], h=0.7)
    assert sm.evaluate(0.0) == pytest.approx(0.5, abs=1e-12)


def test_kernel_matches_naive_direct_sum():
    rng = np.random.default_rng(42)
    xs = rng.uniform(-1, 1, 50)
    zs = xs ** 2
    sm = fit_kernel_mean(list(zip(xs, zs)), h=0.3)
    expected = naive_nw(xs, zs, 0.3, 0.5)
    assert sm.evaluate(0.5) == pytest.approx(expected, abs=1e-12)


def test_kernel_epanechnikov_matches_naive():
    rng = np.random.default_rng(1)
    xs = rng.uniform(-1, 1, 40)
    zs = np.sin(xs)
    sm = fit_kernel_mean(list(zip(xs, zs)), h=0.4, kernel="epanechnikov")
    expected = naive_nw(xs, zs, 0.4, 0.1, kernel="epanechnikov")
    assert sm.evaluate(0.1) == pytest.approx(expected, abs=1e-12)


def test_cell_equals_kernel_in_small_bandwidth_limit():
    rng = np.random.default_rng(7)
    codes = rng.integers(0, 3, 60).astype(float)
    zs = rng.standard_normal(60)
    cell = fit_cell_mean(list(zip(codes, zs)))
    h = 1e-3  # minimum inter-level gap is 1
    kern = fit_kernel_mean(list(zip(codes, zs)), h=h)
    for level in (0.0, 1.0, 2.0):
        assert kern.evaluate(level) == pytest.approx(cell.evaluate(level), abs=1e-9)


def test_smoothers_linear_in_z():
    rng = np.random.default_rng(5)
    xs = rng.uniform(0, 1, 30)
    z1 = rng.standard_normal(30)
    z2 = rng.standard_normal(30)
    a, b = 2.5, -1.25
    k_comb = fit_kernel_mean(list(zip(xs, a * z1 + b * z2)), h=0.2)
    k1 = fit_kernel_mean(list(zip(xs, z1)), h=0.2)
    k2 = fit_kernel_mean(list(zip(xs, z2)), h=0.2)
    for x0 in (0.2, 0.5, 0.9):
        assert k_comb.evaluate(x0) == pytest.approx(
            a * k1.evaluate(x0) + b * k2.evaluate(x0), abs=1e-12)
    codes = rng.integers(0, 2, 30).astype(float)
    c_comb = fit_cell_mean(list(zip(codes, a * z1 + b * z2)))
    c1 = fit_cell_mean(list(zip(codes, z1)))
    c2 = fit_cell_mean(list(zip(codes, z2)))
    for lv in (0.0, 1.0):
        assert c_comb.evaluate(lv) == pytest.approx(
            a * c1.evaluate(lv) + b * c2.evaluate(lv), abs=1e-12)


def test_evaluation_bounded_by_z_range():
    rng = np.random.default_rng(9)
    xs = rng.uniform(-2, 2, 50)
    zs = rng.uniform(3, 9, 50)
    sm = fit_kernel_mean(list(zip(xs, zs)), h=0.3)
    for x0 in np.linspace(-2, 2, 17):
        v = sm.evaluate(x0)
        assert zs.min() - 1e-12 <= v <= zs.max() + 1e-12


def test_cv_pure_noise_prefers_large_bandwidth():
    rng = np.random.default_rng(21)
    xs = rng.uniform(-1, 1, 80)
    zs = rng.standard_normal(80)
    bw = select_bandwidth_cv(xs, zs)
    h0 = silverman_bandwidth(xs)
    grid = h0 * np.exp(np.linspace(np.log(CV_GRID_SPAN[0]), np.log(CV_GRID_SPAN[1]),
                                   CV_GRID_POINTS))
    errors = [naive_loo_cv_error(xs, zs, h) for h in grid]
    assert bw.h == pytest.approx(grid[int(np.argmin(errors))], rel=1e-12)
    assert bw.h >= grid[int(0.7 * CV_GRID_POINTS)]  # oversmoothing wins on noise


def test_cv_exact_signal_prefers_small_bandwidth():
    rng = np.random.default_rng(22)
    xs = np.sort(rng.uniform(-1, 1, 90))
    zs = xs.copy()
    bw = select_bandwidth_cv(xs, zs)
    h0 = silverman_bandwidth(xs)
    grid = h0 * np.exp(np.linspace(np.log(CV_GRID_SPAN[0]), np.log(CV_GRID_SPAN[1]),
                                   CV_GRID_POINTS))
    errors = [naive_loo_cv_error(xs, zs, h) for h in grid]
    assert bw.h == pytest.approx(grid[int(np.argmin(errors))], rel=1e-12)
    assert bw.h <= grid[int(0.35 * CV_GRID_POINTS)]


def test_cv_identical_points_fails():
    xs = np.ones(10)
    zs = np.arange(10.0)
    with pytest.raises(BandwidthSelectionFailed):
        select_bandwidth_cv(xs, zs)


def test_cv_needs_ten_points():
    with pytest.raises(ValueError):
        select_bandwidth_cv(np.arange(5.0), np.arange(5.0))
