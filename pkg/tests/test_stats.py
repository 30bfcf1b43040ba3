"""Statistics kernel: channel stats, affine remapping, resize, hue."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from promptdehaze import (
    EPS,
    ChannelStats,
    affine_normalize,
    channel_stats,
    resize_bilinear,
    rgb_to_hue_saturation,
)


def naive_channel_stats(arr, channel_axis):
    """Two-pass double-precision oracle."""
    arr = np.asarray(arr, dtype=np.float64)
    arr = np.moveaxis(arr, channel_axis, 0)
    means, stds = [], []
    for ch in arr:
        flat = ch.ravel()
        m = flat.sum() / flat.size
        var = ((flat - m) ** 2).sum() / flat.size
        means.append(m)
        stds.append(max(np.sqrt(var), EPS))
    return np.array(means), np.array(stds)


class TestChannelStats:
    def test_single_channel_map(self):
        fmap = np.array([[[1.0, 2.0], [3.0, 4.0]]])  # C=1, 2x2
        s = channel_stats(fmap, channel_axis=0)
        assert s.mean[0] == pytest.approx(2.5)
        assert s.std[0] == pytest.approx(np.sqrt(1.25))

    def test_constant_channel_hits_floor(self):
        fmap = np.full((1, 4, 4), 0.7)
        s = channel_stats(fmap, channel_axis=0)
        assert s.mean[0] == pytest.approx(0.7)
        assert s.std[0] == EPS

    def test_constant_rgb_channels(self):
        img = np.empty((5, 6, 3))
        img[..., 0], img[..., 1], img[..., 2] = 0.0, 0.5, 1.0
        s = channel_stats(img)
        assert np.allclose(s.mean, [0.0, 0.5, 1.0])
        assert np.all(s.std == EPS)

    def test_matches_two_pass_oracle(self, rng):
        for _ in range(10):
            h, w = rng.integers(2, 64, 2)
            arr = rng.standard_normal((int(h), int(w), 3))
            s = channel_stats(arr)
            m, sd = naive_channel_stats(arr, -1)
            assert np.allclose(s.mean, m, atol=1e-7)
            assert np.allclose(s.std, sd, atol=1e-7)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            channel_stats(np.empty((0, 0, 3)))


class TestAffineNormalize:
    def test_identity_is_exact(self, rng):
        x = rng.standard_normal((3, 7, 5))
        s = channel_stats(x, channel_axis=0)
        out = affine_normalize(x, s, s, channel_axis=0)
        assert np.array_equal(out, x)

    def test_reaches_requested_stats(self, rng):
        x = rng.standard_normal((8, 9, 3))
        target = ChannelStats(np.array([0.8, 0.1, -0.2]), np.array([0.1, 0.5, 2.0]))
        out = affine_normalize(x, channel_stats(x), target)
        got = channel_stats(out)
        assert np.allclose(got.mean, target.mean, atol=1e-5)
        assert np.allclose(got.std, target.std, atol=1e-5)

    def test_hand_example(self):
        x = np.array([0.0, 1.0]).reshape(1, 2, 1)
        src = ChannelStats(np.array([0.5]), np.array([0.5]))
        dst = ChannelStats(np.array([1.0]), np.array([1.0]))
        out = affine_normalize(x, src, dst)
        assert np.allclose(out.ravel(), [0.0, 2.0])

    def test_channel_mismatch_rejected(self, rng):
        x = rng.standard_normal((4, 4, 3))
        bad = ChannelStats(np.zeros(2), np.ones(2))
        with pytest.raises(ValueError):
            affine_normalize(x, bad, bad)

    @given(
        scale=st.floats(0.1, 4.0),
        offset=st.floats(-2.0, 2.0),
        seed=st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=30, deadline=None)
    def test_linear_in_input(self, scale, offset, seed):
        # normalize(a*x + b) must equal direct evaluation of the affine law
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((6, 5, 3))
        src = channel_stats(x)
        dst = ChannelStats(rng.uniform(-1, 1, 3), rng.uniform(0.2, 2.0, 3))
        y = scale * x + offset
        src_y = ChannelStats(scale * src.mean + offset, scale * src.std)
        direct = dst.std * (y - src_y.mean.reshape(1, 1, 3)) / src_y.std.reshape(
            1, 1, 3
        ) + dst.mean.reshape(1, 1, 3)
        assert np.allclose(affine_normalize(y, src_y, dst), direct, atol=1e-10)

    def test_roundtrip_property(self, rng):
        # stats(normalize(x, stats(x), t)) == t for any valid t
        for _ in range(5):
            x = rng.standard_normal((10, 11, 3))
            t = ChannelStats(rng.uniform(-2, 2, 3), rng.uniform(EPS, 3.0, 3))
            got = channel_stats(affine_normalize(x, channel_stats(x), t))
            assert np.allclose(got.mean, t.mean, atol=1e-5)
            assert np.allclose(got.std, t.std, atol=1e-5)


class TestResizeBilinear:
    def test_same_size_identity(self, rng):
        img = rng.random((7, 9, 3))
        assert np.array_equal(resize_bilinear(img, 9, 7), img)

    def test_constant_stays_constant(self):
        img = np.full((5, 4, 3), 0.37)
        out = resize_bilinear(img, 11, 13)
        assert np.allclose(out, 0.37)

    def test_row_upsample_convention(self):
        # 2-wide row [0, 1] -> 4-wide: half-pixel centers give 0, .25, .75, 1
        img = np.zeros((1, 2, 3))
        img[0, 1] = 1.0
        out = resize_bilinear(img, 4, 1)[0, :, 0]
        assert np.allclose(out, [0.0, 0.25, 0.75, 1.0])
        assert np.all(np.diff(out) >= 0)
        assert out[0] == 0.0 and out[-1] == 1.0

    def test_zero_target_rejected(self, rng):
        with pytest.raises(ValueError):
            resize_bilinear(rng.random((4, 4, 3)), 0, 4)


class TestHueSaturation:
    @pytest.mark.parametrize(
        "pixel,hue,sat",
        [
            ((1.0, 0.0, 0.0), 0.0, 1.0),
            ((0.0, 1.0, 0.0), 1.0 / 3.0, 1.0),
            ((0.0, 0.0, 1.0), 2.0 / 3.0, 1.0),
            ((0.5, 0.5, 0.5), 0.0, 0.0),
            ((0.0, 0.0, 0.0), 0.0, 0.0),
        ],
    )
    def test_known_colors(self, pixel, hue, sat):
        img = np.array(pixel).reshape(1, 1, 3)
        h, s = rgb_to_hue_saturation(img)
        assert h[0, 0] == pytest.approx(hue)
        assert s[0, 0] == pytest.approx(sat)

    def test_ranges(self, rng):
        img = rng.random((16, 16, 3)) * 1.4 - 0.2  # exercise the clamp
        h, s = rgb_to_hue_saturation(img)
        assert np.all((h >= 0) & (h < 1))
        assert np.all((s >= 0) & (s <= 1))
