"""Shared synthetic-image generators for the test suite."""

import numpy as np
import pytest
from scipy import ndimage

from promptdehaze import AsmParams, partition, synthesize_haze


def make_scene(rng, h=120, w=160):
    """Colorful clean scene: ramps + blobs + channel-diverse texture.

    The per-channel texture amplitudes are deliberately spread out so the
    cross-channel std statistics resemble natural photographs (a scene with
    identical texture in R, G and B makes the std guard reject everything).
    """
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    yy /= h
    xx /= w
    img = np.zeros((h, w, 3))
    tex_amps = rng.uniform(0.015, 0.09, 3)
    rng.shuffle(tex_amps)
    for c in range(3):
        fx, fy = rng.uniform(0.5, 2.0, 2)
        phase = rng.uniform(0, 2 * np.pi, 2)
        img[..., c] = 0.45 + 0.2 * np.sin(2 * np.pi * fx * xx + phase[0]) * np.cos(
            2 * np.pi * fy * yy + phase[1]
        )
        for _ in range(5):
            cy, cx = rng.uniform(0, 1, 2)
            s = rng.uniform(0.04, 0.15)
            amp = rng.uniform(-0.25, 0.3)
            img[..., c] += amp * np.exp(
                -(((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
            )
        for sigma, scale in [(0.8, 1.0), (2.5, 0.8)]:
            noise = rng.standard_normal((h, w))
            img[..., c] += tex_amps[c] * scale * ndimage.gaussian_filter(noise, sigma)
    return np.clip(img, 0.02, 0.98)


def make_reference(rng, h=120, w=160):
    """Texture-rich haze-free reference (the prompt source)."""
    img = np.zeros((h, w, 3))
    amps = np.array([0.05, 0.08, 0.11])
    for c in range(3):
        for sigma, scale in [(0.8, 1.0), (2.5, 0.9), (6.0, 0.7)]:
            noise = rng.standard_normal((h, w))
            img[..., c] += amps[c] * scale * ndimage.gaussian_filter(noise, sigma)
        img[..., c] += 0.5 + 0.1 * np.sin(
            2 * np.pi * (c + 1) * np.linspace(0, 1, w)
        )[None, :]
    return np.clip(img, 0.02, 0.98)


def make_probe(rng, h=96, w=128, n_scales=4):
    """Band-limited noise at several scales: every pyramid level energized."""
    img = np.zeros((h, w, 3))
    for s in range(n_scales):
        noise = rng.standard_normal((h, w, 3))
        sigma = 0.7 * 2.0**s
        img += 0.12 * ndimage.gaussian_filter(noise, (sigma, sigma, 0))
    return np.clip(0.5 + img, 0.02, 0.98)


def patch_constant_t(rng, h, w, side, lo=0.3, hi=0.8):
    """Per-patch-constant transmission field on a square grid."""
    grid = partition((h, w), side)
    t = np.empty((h, w))
    for (y0, y1, x0, x1) in grid.regions:
        t[y0:y1, x0:x1] = rng.uniform(lo, hi)
    return t


def make_hazy_pair(rng, h=120, w=160, t_side=40, colored_a=False):
    """(clean, hazy) pair with per-patch-constant transmission."""
    clean = make_scene(rng, h, w)
    t = patch_constant_t(rng, h, w, t_side)
    if colored_a:
        a = rng.uniform(0.75, 0.95, 3)
    else:
        a = np.full(3, rng.uniform(0.8, 0.95))
    hazy = synthesize_haze(clean, AsmParams(a, t))
    return clean, hazy


def make_tinted(rng, h=120, w=160):
    """Monochrome scene under a single-hue cast: hue spread is ~0."""
    lum = make_scene(rng, h, w).mean(axis=2)
    cast = np.sort(rng.uniform(0.55, 1.0, 3))
    return np.clip(lum[..., None] * cast[None, None, :], 0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


@pytest.fixture
def scene(rng):
    return make_scene(rng)


@pytest.fixture
def reference():
    return make_reference(np.random.default_rng(1234))
