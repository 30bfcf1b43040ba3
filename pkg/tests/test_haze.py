"""Haze synthesis and dark-channel analyzers."""

import numpy as np
import pytest

from promptdehaze import (
    AsmParams,
    DarkChannelConfig,
    dark_channel,
    haze_density,
    hazy_region_mask,
    synthesize_haze,
)


def brute_force_dark_channel(img, window):
    """Double-loop oracle with edge replication."""
    h, w = img.shape[:2]
    per_pixel = img.min(axis=2)
    half = window // 2
    out = np.empty((h, w))
    for y in range(h):
        for x in range(w):
            y0, y1 = max(0, y - half), min(h, y + half + 1)
            x0, x1 = max(0, x - half), min(w, x + half + 1)
            out[y, x] = per_pixel[y0:y1, x0:x1].min()
    return out


class TestSynthesize:
    def test_full_transmission_is_identity(self, scene):
        out = synthesize_haze(scene, AsmParams(0.8, 1.0))
        assert np.allclose(out, scene)

    def test_opaque_limit_approaches_airlight(self, scene):
        out = synthesize_haze(scene, AsmParams((0.8, 0.8, 0.8), 1e-3))
        assert np.allclose(out, 0.8, atol=2e-3)

    def test_hand_example(self):
        clean = np.full((4, 4, 3), 0.2)
        out = synthesize_haze(clean, AsmParams(1.0, 0.5))
        assert np.allclose(out, 0.6)

    def test_transmission_map(self, scene):
        t = np.full(scene.shape[:2], 0.5)
        t[:10] = 0.9
        out = synthesize_haze(scene, AsmParams(1.0, t))
        expected = scene * t[..., None] + (1.0 - t[..., None])
        assert np.allclose(out, expected)

    @pytest.mark.parametrize("bad_t", [0.0, -0.3, 1.5])
    def test_invalid_transmission_rejected(self, bad_t):
        with pytest.raises(ValueError):
            AsmParams(0.8, bad_t)

    def test_invalid_airlight_rejected(self):
        with pytest.raises(ValueError):
            AsmParams((0.0, 0.5, 0.5), 0.5)

    def test_round_trip_recovers_clean(self, scene, rng):
        for _ in range(5):
            t = float(rng.uniform(0.2, 0.95))
            a = rng.uniform(0.5, 1.0, 3)
            hazy = synthesize_haze(scene, AsmParams(a, t))
            recovered = (hazy - a.reshape(1, 1, 3) * (1.0 - t)) / t
            assert np.max(np.abs(recovered - scene)) < 1e-6


class TestDarkChannel:
    def test_constant_gray(self):
        img = np.full((9, 9, 3), 0.4)
        assert np.allclose(dark_channel(img, 5), 0.4)

    def test_single_zero_pixel_dominates(self):
        img = np.full((7, 7, 3), 0.9)
        img[3, 3] = 0.0
        assert np.allclose(dark_channel(img, 15), 0.0)

    def test_matches_brute_force(self, rng):
        img = rng.random((12, 10, 3))
        for window in (1, 3, 5, 15):
            got = dark_channel(img, window)
            assert np.allclose(got, brute_force_dark_channel(img, window))

    def test_even_window_rejected(self, scene):
        with pytest.raises(ValueError):
            dark_channel(scene, 4)

    def test_monotone_in_brightening(self, rng):
        img = rng.random((10, 10, 3))
        before = dark_channel(img, 3)
        brighter = img.copy()
        brighter[4, 5] = np.minimum(brighter[4, 5] + 0.3, 1.0)
        after = dark_channel(brighter, 3)
        assert np.all(after >= before - 1e-12)


class TestHazeDensity:
    def test_black_and_white(self):
        assert haze_density(np.zeros((8, 8, 3))) == 0.0
        assert haze_density(np.ones((8, 8, 3))) == 1.0

    def test_half_and_half_window_one(self):
        img = np.zeros((4, 8, 3))
        img[:, 4:] = 1.0
        assert haze_density(img, DarkChannelConfig(window=1)) == pytest.approx(0.5)

    def test_nonincreasing_in_transmission(self, scene):
        cfg = DarkChannelConfig()
        densities = []
        for t in (0.2, 0.4, 0.6, 0.8, 1.0):
            hazy = synthesize_haze(scene, AsmParams(1.0, t))
            densities.append(haze_density(np.clip(hazy, 0, 1), cfg))
        assert all(a >= b - 1e-12 for a, b in zip(densities, densities[1:]))


class TestHazyRegionMask:
    def test_white_image_all_true(self):
        mask = hazy_region_mask(np.ones((8, 8, 3)))
        assert mask.all()

    def test_black_image_fallback_all_true(self):
        mask = hazy_region_mask(np.zeros((8, 8, 3)))
        assert mask.all()

    def test_bimodal_thresholding(self):
        img = np.zeros((6, 12, 3))
        img[:, 6:] = 0.9
        mask = hazy_region_mask(img, DarkChannelConfig(window=1, density_threshold=0.6))
        assert mask[:, 6:].all()
        assert not mask[:, :6].any()
