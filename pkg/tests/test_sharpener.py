import numpy as np
import pytest

from raisr.sharpener import (BINOMIAL_TAPS, DogConfig, DogLayer, PRESETS,
                             contrast_preset, detail_preset, dog_enhance,
                             gaussian_taps, separable_gaussian, sharpen)


class TestGaussianTaps:
    def test_normalized_and_symmetric(self):
        for sigma in (0.5, 0.85, 2.0, 8.5):
            taps = gaussian_taps(sigma)
            assert taps.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.allclose(taps, taps[::-1])
            assert len(taps) % 2 == 1

    def test_default_length_covers_three_sigma(self):
        assert len(gaussian_taps(2.0)) == 13
        assert len(gaussian_taps(8.5, 65)) == 65

    def test_peak_at_center(self):
        taps = gaussian_taps(1.5)
        assert np.argmax(taps) == len(taps) // 2

    def test_validation(self):
        with pytest.raises(ValueError):
            gaussian_taps(0.0)
        with pytest.raises(ValueError):
            gaussian_taps(1.0, 4)


class TestSeparableGaussian:
    def test_constant_plane_invariant(self):
        p = np.full((9, 9), 77.0)
        assert np.allclose(separable_gaussian(p, taps=BINOMIAL_TAPS), 77.0,
                           atol=1e-12)

    def test_impulse_gives_outer_product(self):
        p = np.zeros((9, 9))
        p[4, 4] = 16.0
        out = separable_gaussian(p, taps=BINOMIAL_TAPS)
        t = np.array([1.0, 2.0, 1.0])
        assert np.allclose(out[3:6, 3:6], np.outer(t, t) / 16.0 * 16.0,
                           atol=1e-12)
        assert out.sum() == pytest.approx(16.0, abs=1e-9)

    def test_matches_dense_convolution_oracle(self, rng):
        p = rng.uniform(0, 255, (20, 20))
        sigma = 2.0
        taps = gaussian_taps(sigma)
        half = len(taps) // 2
        kernel = np.outer(taps, taps)
        padded = np.pad(p, half, mode="edge")
        want = np.zeros_like(p)
        for r in range(p.shape[0]):
            for c in range(p.shape[1]):
                want[r, c] = np.sum(kernel * padded[r:r + len(taps),
                                                    c:c + len(taps)])
        assert np.max(np.abs(separable_gaussian(p, sigma=sigma) - want)) < 1e-9

    def test_reduces_variance(self, rng):
        p = rng.uniform(0, 255, (32, 32))
        assert separable_gaussian(p, sigma=1.5).var() < p.var()


class TestDogEnhance:
    def test_identical_levels_identity(self, rng):
        p = rng.uniform(0, 255, (8, 8))
        assert np.allclose(dog_enhance(p, p, 55.0), p, atol=1e-10)

    def test_zero_rho_returns_fine(self, rng):
        fine = rng.uniform(0, 255, (8, 8))
        coarse = rng.uniform(0, 255, (8, 8))
        assert np.array_equal(dog_enhance(fine, coarse, 0.0), fine)

    def test_linear_form(self):
        fine = np.full((4, 4), 10.0)
        coarse = np.full((4, 4), 6.0)
        assert np.all(dog_enhance(fine, coarse, 2.0) == 18.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            dog_enhance(np.zeros((3, 3)), np.zeros((3, 4)), 1.0)


def edge_image(n=32, lo=80.0, hi=170.0):
    p = np.full((n, n), lo)
    p[:, n // 2:] = hi
    return p


class TestSharpen:
    def test_constant_plane_fixed_point(self):
        p = np.full((16, 16), 123.0)
        for preset in PRESETS.values():
            assert np.allclose(sharpen(p, preset()), p, atol=1e-12)

    def test_zero_rho_identity(self, rng):
        p = rng.uniform(20, 230, (24, 24))
        cfg = DogConfig(layers=(DogLayer(rho=0.0, taps=BINOMIAL_TAPS),))
        assert np.allclose(sharpen(p, cfg), p, atol=1e-12)

    def test_single_unblended_layer_is_dog(self, rng):
        p = rng.uniform(60, 190, (16, 16))
        cfg = DogConfig(layers=(DogLayer(rho=40.0, taps=BINOMIAL_TAPS),))
        blurred = separable_gaussian(p, taps=BINOMIAL_TAPS)
        want = np.clip(dog_enhance(p, blurred, 0.4), 0, 255)
        assert np.allclose(sharpen(p, cfg), want, atol=1e-12)

    def test_overshoot_monotone_in_rho(self):
        p = edge_image()
        contrasts = []
        for rho in (0.0, 25.0, 55.0, 90.0):
            out = sharpen(p, detail_preset(rho))
            contrasts.append(out.max() - out.min())
        assert all(b >= a for a, b in zip(contrasts, contrasts[1:]))
        assert contrasts[-1] > contrasts[0]

    def test_output_clamped(self):
        p = edge_image(lo=2.0, hi=253.0)
        out = sharpen(p, detail_preset(90.0))
        assert out.min() >= 0.0 and out.max() <= 255.0

    def test_mean_roughly_preserved(self, rng):
        from scipy.ndimage import gaussian_filter
        p = np.clip(gaussian_filter(rng.uniform(0, 255, (48, 48)), 1.5),
                    30, 220)
        out = sharpen(p, detail_preset())
        assert abs(out.mean() - p.mean()) < 1.0

    def test_stays_close_to_input(self, rng):
        from scipy.ndimage import gaussian_filter
        p = np.clip(gaussian_filter(rng.uniform(0, 255, (64, 64)), 1.0),
                    0, 255)
        from raisr.image_ops import ssim
        assert ssim(sharpen(p, detail_preset()), p) > 0.9

    def test_layer_locality(self):
        """A [1,2,1]-killed +-1 Nyquist pattern passes the first binomial
        layer untouched: its first-layer band is the whole signal, and the
        following layers see a constant plane."""
        n = 16
        p = 128.0 + ((-1.0) ** (np.indices((n, n)).sum(axis=0)))
        cfg = DogConfig(layers=(DogLayer(rho=50.0, taps=BINOMIAL_TAPS),
                                DogLayer(rho=50.0, taps=BINOMIAL_TAPS)))
        out = sharpen(p, cfg)
        want = sharpen(p, DogConfig(layers=(DogLayer(rho=50.0,
                                                     taps=BINOMIAL_TAPS),)))
        # interior only: edge replication breaks the Nyquist cancellation
        # on the border ring
        assert np.allclose(out[2:-2, 2:-2], want[2:-2, 2:-2], atol=1e-9)


class TestPresets:
    def test_detail_structure(self):
        cfg = detail_preset()
        assert len(cfg.layers) == 3
        assert cfg.layers[0].taps == (0.25, 0.5, 0.25)
        assert cfg.layers[1].taps == (0.25, 0.5, 0.25)
        assert cfg.layers[2].sigma == pytest.approx(0.85 * np.sqrt(2.0))
        assert all(l.rho == 55.0 for l in cfg.layers)
        assert all(l.blend_mode == "randomness" for l in cfg.layers)

    def test_contrast_structure(self):
        cfg = contrast_preset()
        assert len(cfg.layers) == 2
        assert cfg.layers[0].taps == (0.25, 0.5, 0.25)
        assert len(cfg.layers[1].taps) == 65
        assert all(l.rho == 55.0 for l in cfg.layers)
        assert all(l.blend_mode == "hamming" for l in cfg.layers)

    def test_cumulative_sigma_chain(self):
        """Layer blur variances accumulate geometrically with ratio sqrt(2):
        cumulative sigmas approximately 0.85, 1.2, 1.7."""
        sig0 = 0.85
        cum = [sig0, sig0 * np.sqrt(2.0),
               np.sqrt(2 * sig0 ** 2 + (0.85 * np.sqrt(2.0)) ** 2)]
        assert cum[1] / cum[0] == pytest.approx(np.sqrt(2.0))
        assert cum[2] / cum[1] == pytest.approx(np.sqrt(2.0))


class TestValidation:
    def test_layer_args(self):
        with pytest.raises(ValueError):
            DogLayer(rho=-1.0, taps=BINOMIAL_TAPS)
        with pytest.raises(ValueError):
            DogLayer(rho=1.0)  # neither sigma nor taps
        with pytest.raises(ValueError):
            DogLayer(rho=1.0, sigma=1.0, taps=BINOMIAL_TAPS)
        with pytest.raises(ValueError):
            DogLayer(rho=1.0, taps=(0.5, 0.5))  # even length
        with pytest.raises(ValueError):
            DogLayer(rho=1.0, taps=(0.3, 0.3, 0.3))  # not normalized
        with pytest.raises(ValueError):
            DogLayer(rho=1.0, taps=BINOMIAL_TAPS, blend_mode="other")

    def test_config_needs_layers(self):
        with pytest.raises(ValueError):
            DogConfig(layers=())
