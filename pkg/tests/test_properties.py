"""Property-based checks for the pure numeric helpers."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from raisr.blending import lcc_size, randomness_map
from raisr.hashkeys import Quantizer, coherence, eigen2x2, quantize
from raisr.image_ops import psnr, resample, to_uint8
from raisr.learner import pixel_type
from raisr.sharpener import dog_enhance, gaussian_taps

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.floats(0, 255), st.integers(1, 12), st.integers(1, 12),
       st.sampled_from(["nearest", "bilinear", "bicubic"]))
def test_resample_constant_plane(value, out_w, out_h, kernel):
    out = resample(np.full((5, 7), value), out_w, out_h, kernel)
    assert out.shape == (out_h, out_w)
    assert np.max(np.abs(out - value)) < 1e-9


@given(st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=4))
def test_to_uint8_bounds(values):
    out = to_uint8(np.array(values).reshape(2, 2))
    assert out.dtype == np.uint8
    assert np.all((out >= 0) & (out <= 255))


@given(st.integers(0, 10 ** 6), st.integers(0, 255))
@settings(max_examples=50)
def test_psnr_symmetric_and_positive(seed, offset):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 255, (4, 4))
    b = np.clip(a + offset / 8.0, 0, 255)
    assert psnr(a, b) == psnr(b, a)
    assert 0.0 <= psnr(a, b) <= 99.0


@given(st.integers(0, 255))
def test_lcc_complement_and_range(desc):
    assert lcc_size(desc) == lcc_size(desc ^ 0xFF)
    assert 1 <= lcc_size(desc) <= 8
    w = randomness_map(np.array([[desc]], dtype=np.uint8))[0, 0]
    assert 0.0 <= w <= 1.0


@given(st.floats(0, 1e6), st.floats(0, 1e6), st.floats(-1e6, 1e6))
def test_eigen_psd_invariants(a, c, b_raw):
    # clamp b so [[a, b], [b, c]] stays PSD
    b = np.clip(b_raw, -np.sqrt(a * c), np.sqrt(a * c))
    e = eigen2x2(a, b, c)
    assert e.lam1 >= e.lam2 >= 0.0
    assert 0.0 <= e.theta < 180.0
    mu = coherence(e.lam1, e.lam2)
    assert 0.0 <= mu <= 1.0


@given(st.floats(0, 180, exclude_max=True), st.floats(0, 1e4),
       st.floats(0, 1))
def test_quantize_in_range(theta, strength, mu):
    q = Quantizer()
    a, s, c = quantize(theta, strength, mu, q)
    assert 0 <= int(a) < q.angle_bins
    assert 0 <= int(s) < q.strength_bins
    assert 0 <= int(c) < q.coherence_bins


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.integers(1, 8))
def test_pixel_type_periodic(r, c, s):
    t = pixel_type(r, c, s)
    assert 0 <= t < s * s
    assert t == pixel_type(r + s, c + 3 * s, s)


@given(st.floats(0.1, 20.0))
def test_gaussian_taps_normalized(sigma):
    taps = gaussian_taps(sigma)
    assert abs(taps.sum() - 1.0) < 1e-12
    assert np.allclose(taps, taps[::-1])


@given(st.floats(0, 255), st.floats(0, 255), st.floats(0, 10))
def test_dog_enhance_linearity(fine, coarse, rho):
    out = dog_enhance(np.array([[fine]]), np.array([[coarse]]), rho)
    assert out[0, 0] == (1.0 + rho) * fine - rho * coarse
