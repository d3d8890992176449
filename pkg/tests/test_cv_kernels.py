import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from firelabel.cv_kernels import (
    DegenerateHistogramError,
    binarize,
    canny,
    dilate,
    erode,
    euclidean_distance_transform,
    gaussian_blur,
    iou,
    otsu_threshold,
    ssim,
    thermal_jpg_to_gray,
)
from reference_impls import canny_reference, edt_brute_force, otsu_brute_force, ssim_reference


class TestOtsu:
    def test_bimodal_separation(self):
        values = np.array([20.0] * 50 + [400.0] * 50)
        res = otsu_threshold(values, (0.0, 500.0))
        mask = binarize(values.reshape(10, 10), res.tau)
        assert np.array_equal(mask.ravel(), np.array([0] * 50 + [1] * 50))
        assert values.min() < res.tau <= values.max()

    def test_constant_input_degenerate(self):
        with pytest.raises(DegenerateHistogramError, match="degenerate histogram"):
            otsu_threshold(np.full(100, 37.0), (0.0, 500.0))

    def test_near_constant_same_bin_degenerate(self):
        # distinct values landing in one bin still cannot be split
        with pytest.raises(DegenerateHistogramError):
            otsu_threshold(np.array([10.0, 10.5]), (0.0, 500.0))

    def test_too_few_samples(self):
        with pytest.raises(ValueError, match="2 samples"):
            otsu_threshold(np.array([1.0]), (0.0, 500.0))

    def test_bad_range(self):
        with pytest.raises(ValueError, match="hi > lo"):
            otsu_threshold(np.array([1.0, 2.0]), (5.0, 5.0))

    def test_matches_exhaustive_search(self, rng):
        for _ in range(10):
            grid = rng.uniform(0.0, 500.0, size=(32, 32))
            res = otsu_threshold(grid, (0.0, 500.0))
            bin_ref, score_ref = otsu_brute_force(grid, 0.0, 500.0)
            assert res.bin_index == bin_ref
            width = 500.0 / 256
            assert res.between_class_variance == pytest.approx(score_ref * width * width, rel=1e-12)

    def test_variance_maximal_over_all_bins(self, rng):
        grid = rng.uniform(0.0, 255.0, size=(16, 16)).astype(np.uint8)
        res = otsu_threshold(grid, (0.0, 255.0))
        _, best = otsu_brute_force(grid, 0.0, 255.0)
        width = 255.0 / 256
        assert res.between_class_variance >= best * width * width - 1e-15

    def test_tau_within_sample_range(self, rng):
        for _ in range(20):
            vals = rng.uniform(50.0, 450.0, size=200)
            res = otsu_threshold(vals, (0.0, 500.0))
            assert vals.min() <= res.tau <= vals.max()


class TestBinarize:
    def test_basic(self):
        assert np.array_equal(binarize(np.array([[10.0, 300.0]]), 200.0), [[0, 1]])

    def test_threshold_at_min_gives_all_ones(self):
        v = np.array([[5.0, 9.0], [7.0, 12.0]])
        assert binarize(v, 5.0).all()

    def test_matches_brute_force(self, rng):
        grid = rng.uniform(0.0, 500.0, size=(17, 23))
        thr = 212.5
        mask = binarize(grid, thr)
        for y in range(17):
            for x in range(23):
                assert mask[y, x] == (1 if grid[y, x] >= thr else 0)


class TestGaussianBlur:
    def test_constant_preserved(self):
        out = gaussian_blur(np.full((9, 9), 321.0), sigma=1.5)
        assert np.allclose(out, 321.0, atol=1e-9)

    def test_impulse_reproduces_kernel(self):
        grid = np.zeros((11, 11))
        grid[5, 5] = 1.0
        out = gaussian_blur(grid, sigma=1.0)
        r = math.ceil(3.0)
        xs = np.arange(-r, r + 1, dtype=np.float64)
        k = np.exp(-(xs**2) / 2.0)
        k /= k.sum()
        expected = np.zeros((11, 11))
        expected[5 - r : 5 + r + 1, 5 - r : 5 + r + 1] = np.outer(k, k)
        assert np.allclose(out, expected, atol=1e-12)

    def test_mass_preserved_for_interior_impulse(self):
        grid = np.zeros((11, 11))
        grid[5, 5] = 7.5
        out = gaussian_blur(grid, sigma=1.0)
        assert out.sum() == pytest.approx(7.5, abs=1e-6)

    def test_invalid_sigma(self):
        with pytest.raises(ValueError):
            gaussian_blur(np.zeros((4, 4)), sigma=0.0)


def vertical_step(h, w, col, low_val, high_val):
    grid = np.full((h, w), float(low_val))
    grid[:, col:] = float(high_val)
    return grid


class TestCanny:
    def test_constant_grid_empty(self):
        assert canny(np.full((16, 16), 50.0), low=10.0, high=200.0).sum() == 0

    def test_step_produces_thin_band_at_step(self):
        grid = vertical_step(32, 32, 16, 20.0, 420.0)
        edges = canny(grid, low=100.0, high=200.0, sigma=1.0)
        cols = sorted(set(np.argwhere(edges)[:, 1].tolist()))
        assert cols, "expected edges at the step"
        assert set(cols) <= {15, 16}
        assert np.all(edges[:, cols].sum(axis=1) >= 1)
        off_band = edges.copy()
        off_band[:, [15, 16]] = 0
        assert off_band.sum() == 0

    def test_small_step_below_low_threshold_empty(self):
        grid = vertical_step(32, 32, 16, 20.0, 70.0)
        # raw Sobel peak for a 50 C step is ~128, below high; no strong seeds
        edges = canny(grid, low=150.0, high=200.0, sigma=1.0)
        assert edges.sum() == 0

    def test_weak_pixels_removed_without_strong_seed(self):
        grid = vertical_step(32, 32, 16, 20.0, 70.0)
        edges = canny(grid, low=100.0, high=2000.0, sigma=1.0)
        assert edges.sum() == 0

    def test_invalid_thresholds(self):
        with pytest.raises(ValueError):
            canny(np.zeros((8, 8)), low=300.0, high=200.0)

    def test_matches_reference_implementation(self, rng):
        scenes = [
            vertical_step(20, 20, 10, 20.0, 420.0),
            vertical_step(20, 20, 7, 0.0, 260.0).T,
            np.tile(np.linspace(0.0, 500.0, 20), (20, 1)),  # horizontal ramp
            np.add.outer(np.linspace(0, 240, 20), np.linspace(0, 240, 20)),  # diagonal ramp
            rng.uniform(0.0, 500.0, size=(20, 20)),
        ]
        for grid in scenes:
            mine = canny(grid, low=50.0, high=200.0, sigma=1.0)
            ref = canny_reference(grid, low=50.0, high=200.0, sigma=1.0)
            assert np.array_equal(mine, ref)


class TestEDT:
    def test_three_four_five(self):
        edges = np.zeros((8, 8), dtype=np.uint8)
        edges[0, 0] = 1
        field = euclidean_distance_transform(edges)
        assert field[4, 3] == pytest.approx(5.0)
        assert field[0, 0] == 0.0

    def test_empty_edge_map_all_inf(self):
        field = euclidean_distance_transform(np.zeros((6, 6), dtype=np.uint8))
        assert np.all(np.isinf(field))

    def test_matches_brute_force(self, rng):
        for _ in range(5):
            edges = (rng.random((32, 32)) < 0.05).astype(np.uint8)
            field = euclidean_distance_transform(edges)
            ref = edt_brute_force(edges)
            assert np.allclose(field, ref, atol=1e-6)

    def test_one_lipschitz(self, rng):
        edges = (rng.random((32, 32)) < 0.03).astype(np.uint8)
        field = euclidean_distance_transform(edges)
        for _ in range(200):
            y1, x1, y2, x2 = rng.integers(0, 32, size=4)
            d = math.hypot(float(y1 - y2), float(x1 - x2))
            assert abs(field[y1, x1] - field[y2, x2]) <= d + 1e-9


class TestIoU:
    def test_identical_nonempty(self):
        m = np.ones((4, 4), dtype=np.uint8)
        assert iou(m, m) == 1.0

    def test_disjoint(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = np.zeros((4, 4), dtype=np.uint8)
        a[0, 0] = 1
        b[3, 3] = 1
        assert iou(a, b) == 0.0

    def test_shifted_block_hand_count(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = np.zeros((4, 4), dtype=np.uint8)
        a[1:3, 1:3] = 1
        b[1:3, 2:4] = 1
        assert iou(a, b) == pytest.approx(1 / 3)

    def test_both_empty_convention(self):
        z = np.zeros((4, 4), dtype=np.uint8)
        assert iou(z, z) == 1.0
        assert iou(z, np.ones_like(z)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            iou(np.zeros((2, 2)), np.zeros((3, 3)))

    @given(st.integers(0, 2**16 - 1), st.integers(0, 2**16 - 1))
    def test_symmetric_and_bounded(self, bits_a, bits_b):
        a = np.array([(bits_a >> i) & 1 for i in range(16)], dtype=np.uint8).reshape(4, 4)
        b = np.array([(bits_b >> i) & 1 for i in range(16)], dtype=np.uint8).reshape(4, 4)
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0
        if not np.array_equal(a, b):
            assert iou(a, b) < 1.0 or (a.sum() == 0 and b.sum() == 0)


class TestSSIM:
    def test_identity(self, rng):
        img = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-12)

    def test_constant_pair(self):
        img = np.full((12, 12), 77, dtype=np.uint8)
        assert ssim(img, img.copy()) == pytest.approx(1.0)

    def test_matches_windowed_reference(self, rng):
        a = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
        b = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
        assert ssim(a, b) == pytest.approx(ssim_reference(a, b), abs=1e-9)

    def test_symmetry(self, rng):
        a = rng.integers(0, 256, size=(10, 14)).astype(np.uint8)
        b = rng.integers(0, 256, size=(10, 14)).astype(np.uint8)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_too_small(self):
        with pytest.raises(ValueError, match="smaller than"):
            ssim(np.zeros((4, 4)), np.zeros((4, 4)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            ssim(np.zeros((9, 9)), np.zeros((10, 10)))


class TestThermalGray:
    def test_white(self):
        assert thermal_jpg_to_gray(np.full((1, 1, 3), 255, dtype=np.uint8))[0, 0] == 255

    def test_pure_red(self):
        px = np.zeros((1, 1, 3), dtype=np.uint8)
        px[0, 0, 0] = 255
        assert thermal_jpg_to_gray(px)[0, 0] == 76

    def test_gray_fixed_point(self):
        vals = np.arange(256, dtype=np.uint8)
        img = np.stack([vals, vals, vals], axis=-1).reshape(16, 16, 3)
        assert np.array_equal(thermal_jpg_to_gray(img), img[:, :, 0])

    def test_wrong_channels(self):
        with pytest.raises(ValueError, match="3-channel"):
            thermal_jpg_to_gray(np.zeros((4, 4), dtype=np.uint8))


class TestMorphology:
    def test_nesting(self, rng):
        mask = (rng.random((20, 20)) < 0.3).astype(np.uint8)
        er = erode(mask)
        di = dilate(mask)
        assert np.all(er <= mask)
        assert np.all(mask <= di)

    def test_dilate_single_pixel(self):
        m = np.zeros((5, 5), dtype=np.uint8)
        m[2, 2] = 1
        assert dilate(m).sum() == 9
        assert erode(m).sum() == 0
