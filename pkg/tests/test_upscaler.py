import numpy as np
import pytest

from raisr.filterbank import FilterBank
from raisr.hashkeys import Quantizer, key_maps
from raisr.learner import pixel_type
from raisr.upscaler import (UpscaleOptions, apply_filters, back_project,
                            filter_pixel, upscale)

SMALL_Q = Quantizer(4, 2, 2, (16.0,), (0.4,))


def random_bank(rng, scale=2, d=5, q=SMALL_Q):
    filters = rng.normal(0, 0.05, (q.angle_bins, q.strength_bins,
                                   q.coherence_bins, scale ** 2, d * d))
    filters[..., (d * d) // 2] += 1.0  # near-passthrough, keeps output tame
    return FilterBank(scale, d, q, filters)


class TestFilterPixel:
    def test_delta_filter_passthrough(self, rng):
        patch = rng.uniform(0, 255, (5, 5))
        h = np.zeros(25)
        h[12] = 1.0
        assert filter_pixel(patch, h) == patch[2, 2]

    def test_matches_loop_oracle(self, rng):
        patch = rng.uniform(0, 255, 25)
        h = rng.normal(0, 1, 25)
        want = sum(float(patch[i]) * float(h[i]) for i in range(25))
        assert filter_pixel(patch, h) == pytest.approx(want, rel=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            filter_pixel(np.zeros(25), np.zeros(9))


class TestApplyFilters:
    def test_matches_per_pixel_oracle(self, rng):
        fb = random_bank(rng)
        y = rng.uniform(0, 255, (14, 13))
        got = apply_filters(y, fb)
        abins, sbins, cbins = key_maps(y, fb.quantizer)
        d = fb.filter_dim
        half = d // 2
        padded = np.pad(y, half, mode="edge")
        for r in range(y.shape[0]):
            for c in range(y.shape[1]):
                h = fb.filter_for(abins[r, c], sbins[r, c], cbins[r, c],
                                  pixel_type(r, c, fb.scale))
                patch = padded[r:r + d, c:c + d]
                # single-precision internals: allow ~1e-3 grey levels
                assert abs(got[r, c] - filter_pixel(patch, h)) < 5e-3

    def test_band_boundaries_invisible(self, rng):
        fb = random_bank(rng)
        y = rng.uniform(0, 255, (40, 17))
        # band size changes the BLAS blocking, so agreement is only to
        # single-precision round-off
        assert np.allclose(apply_filters(y, fb, band_rows=7),
                           apply_filters(y, fb, band_rows=64), atol=1e-3)

    def test_shape_preserved(self, rng):
        fb = random_bank(rng)
        y = rng.uniform(0, 255, (21, 34))
        assert apply_filters(y, fb).shape == y.shape


class TestUpscale:
    def test_output_dimensions(self, rng):
        fb = random_bank(rng)
        out = upscale(rng.uniform(0, 255, (12, 17)), fb)
        assert out.shape == (24, 34)

    def test_delta_bank_identity(self, rng):
        """A passthrough bank with blending/back-projection off returns the
        initial interpolation (up to the single-precision filter path)."""
        fb = FilterBank.delta(2, 5, SMALL_Q)
        z = rng.uniform(0, 255, (16, 16))
        out = upscale(z, fb, UpscaleOptions(initial_kernel="bilinear"))
        from raisr.image_ops import resample
        initial = resample(z, 32, 32, "bilinear")
        want = np.clip(initial.astype(np.float32).astype(np.float64), 0, 255)
        assert np.array_equal(out, want)

    def test_constant_plane_with_unit_dc_bank(self, rng):
        q = SMALL_Q
        perturb = rng.normal(0, 0.1, (4, 2, 2, 4, 25))
        perturb -= perturb.mean(axis=-1, keepdims=True)  # zero-sum noise
        filters = perturb
        filters[..., 12] += 1.0  # delta + zero-DC perturbation: unit DC gain
        fb = FilterBank(2, 5, q, filters)
        out = upscale(np.full((10, 10), 200.0), fb)
        assert np.max(np.abs(out - 200.0)) < 0.5

    def test_blend_modes_stay_in_range(self, rng):
        from scipy.ndimage import gaussian_filter
        fb = random_bank(rng)
        z = np.clip(gaussian_filter(rng.uniform(0, 255, (16, 16)), 1.0), 0, 255)
        for mode in ("none", "randomness", "hamming"):
            out = upscale(z, fb, UpscaleOptions(blend_mode=mode))
            assert np.all((out >= 0) & (out <= 255))
            assert np.all(np.isfinite(out))

    def test_no_nans_fuzz(self, rng):
        fb = random_bank(rng)
        for _ in range(10):
            h, w = rng.integers(6, 30, 2)
            z = rng.uniform(0, 255, (h, w))
            out = upscale(z, fb, UpscaleOptions(blend_mode="randomness",
                                                bp_iterations=2))
            assert out.shape == (2 * h, 2 * w)
            assert np.all(np.isfinite(out))

    def test_shift_equivariance(self, rng):
        """Shifting the LR input by one sample shifts the output by s,
        away from the borders."""
        from scipy.ndimage import gaussian_filter
        fb = random_bank(rng)
        z = np.clip(gaussian_filter(rng.uniform(0, 255, (24, 24)), 1.2), 0, 255)
        out = upscale(z, fb)
        out_shift = upscale(z[:, 1:], fb)
        a = out[16:32, 18:40]
        b = out_shift[16:32, 16:38]
        assert np.max(np.abs(a - b)) < 1e-2

    def test_too_small_input(self, rng):
        fb = random_bank(rng, d=11)
        with pytest.raises(ValueError):
            upscale(np.zeros((4, 4)), fb)

    def test_options_validation(self):
        with pytest.raises(ValueError):
            UpscaleOptions(initial_kernel="nearest")
        with pytest.raises(ValueError):
            UpscaleOptions(blend_mode="other")
        with pytest.raises(ValueError):
            UpscaleOptions(bp_iterations=-1)


class TestBackProject:
    def test_consistent_estimate_fixed_point(self, rng):
        from raisr.image_ops import resample
        from scipy.ndimage import gaussian_filter
        x = np.clip(gaussian_filter(rng.uniform(0, 255, (32, 32)), 2.0), 0, 255)
        z = resample(x, 16, 16, "bicubic")
        out = back_project(x, z, 2, iterations=5)
        assert np.max(np.abs(out - x)) < 1e-9

    def test_zero_iterations_identity(self, rng):
        est = rng.uniform(0, 255, (20, 20))
        z = rng.uniform(0, 255, (10, 10))
        assert np.array_equal(back_project(est, z, 2, iterations=0), est)

    def test_residual_shrinks(self, rng):
        from raisr.image_ops import resample
        from scipy.ndimage import gaussian_filter
        z = np.clip(gaussian_filter(rng.uniform(0, 255, (16, 16)), 1.0), 0, 255)
        est = resample(z, 32, 32, "bilinear") + rng.normal(0, 4, (32, 32))

        def res(x):
            return np.linalg.norm(z - resample(x, 16, 16, "bicubic"))

        out = back_project(est, z, 2, iterations=10)
        assert res(out) < 0.2 * res(est)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            back_project(np.zeros((20, 21)), np.zeros((10, 10)), 2)
