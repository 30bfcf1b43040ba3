"""Atmospheric scattering synthesis and dark-channel analyzers.

The scattering model I = J*t + A*(1 - t) generates the synthetic benchmark
scenes; the dark channel (min over RGB then min over a local window) gives
a cheap haze-density estimate and the mask that restricts the hue-spread
gate to actually hazy pixels.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .validation import check_image

__all__ = [
    "AsmParams",
    "DarkChannelConfig",
    "synthesize_haze",
    "dark_channel",
    "haze_density",
    "hazy_region_mask",
]


@dataclass(frozen=True)
class AsmParams:
    """Atmospheric light and transmission for haze synthesis.

    ``atmospheric_light`` is a per-channel triple in (0, 1] (a scalar is
    broadcast).  ``transmission`` is a scalar in (0, 1] or a per-pixel H x W
    map; zero transmission is rejected because it destroys the scene term.
    """

    atmospheric_light: np.ndarray
    transmission: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.atmospheric_light, dtype=np.float64))
        if a.size == 1:
            a = np.repeat(a, 3)
        if a.shape != (3,):
            raise ValueError(f"atmospheric_light must be scalar or length 3, got {a.shape}")
        if np.any(a <= 0.0) or np.any(a > 1.0):
            raise ValueError("atmospheric_light components must lie in (0, 1]")
        t = np.asarray(self.transmission, dtype=np.float64)
        if np.any(t <= 0.0) or np.any(t > 1.0):
            raise ValueError("transmission must lie in (0, 1]")
        if t.ndim not in (0, 2):
            raise ValueError(f"transmission must be a scalar or an H x W map, got shape {t.shape}")
        object.__setattr__(self, "atmospheric_light", a)
        object.__setattr__(self, "transmission", t)


@dataclass(frozen=True)
class DarkChannelConfig:
    window: int = 15
    density_threshold: float = 0.6

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 1, got {self.window}")
        if not 0.0 <= self.density_threshold <= 1.0:
            raise ValueError("density_threshold must lie in [0, 1]")


def synthesize_haze(clean, params: AsmParams) -> np.ndarray:
    """Render a hazy image: per pixel, I = J*t + A*(1 - t)."""
    img = check_image(clean, "clean image")
    t = params.transmission
    if t.ndim == 2:
        if t.shape != img.shape[:2]:
            raise ValueError(
                f"transmission map {t.shape} does not match image {img.shape[:2]}"
            )
        t = t[..., None]
    a = params.atmospheric_light.reshape(1, 1, 3)
    return img * t + a * (1.0 - t)


def dark_channel(img, window: int = 15) -> np.ndarray:
    """Min over RGB followed by a min filter over ``window`` (edges replicated)."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    arr = check_image(img, "image")
    per_pixel_min = arr.min(axis=2)
    return ndimage.minimum_filter(per_pixel_min, size=window, mode="nearest")


def haze_density(img, cfg: DarkChannelConfig = DarkChannelConfig()) -> float:
    """Mean dark channel; close to 0 for clear scenes, rises with haze."""
    return float(dark_channel(img, cfg.window).mean())


def hazy_region_mask(img, cfg: DarkChannelConfig = DarkChannelConfig()) -> np.ndarray:
    """Boolean mask of pixels whose dark channel reaches the density threshold.

    Falls back to all-true when nothing qualifies, so downstream reductions
    always see at least one pixel.
    """
    mask = dark_channel(img, cfg.window) >= cfg.density_threshold
    if not mask.any():
        return np.ones_like(mask, dtype=bool)
    return mask
