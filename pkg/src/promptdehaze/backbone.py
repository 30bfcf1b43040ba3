"""Deterministic, exactly invertible multiscale backbone.

A separable low-pass pyramid stands in for a pretrained encoder/decoder:
each level stores the difference between successive low-pass images (a
band), the residual low-pass is the base, and collapsing the pyramid by
upsample-and-add reproduces the input to floating-point accuracy.  Color is
kept at every level (C = 3) so the per-channel adaptation logic sees
meaningful cross-channel statistics.

The same module hosts the statistic-perturbation probe (nudge a level's
mean/std and watch the reconstruction's contrast respond) and the full
dehazing pipeline: prompt generation, per-level adaptation, decode.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .adapt import AdaptConfig, AdaptationTrace, adapt_pyramid_levels
from .prompt import PromptConfig, PromptReport, generate_prompt
from .stats import EPS, ChannelStats, affine_normalize, channel_stats, resize_bilinear
from .validation import check_image

__all__ = [
    "BackboneConfig",
    "Pyramid",
    "DehazeResult",
    "encode",
    "decode",
    "perturb_level_stats",
    "band_rms",
    "dehaze",
]

# 5-tap binomial low-pass, normalized to preserve means.
DEFAULT_KERNEL = (0.0625, 0.25, 0.375, 0.25, 0.0625)


@dataclass(frozen=True)
class BackboneConfig:
    num_levels: int = 3
    kernel: tuple = DEFAULT_KERNEL

    def __post_init__(self):
        if self.num_levels < 1:
            raise ValueError("num_levels must be >= 1")
        k = np.asarray(self.kernel, dtype=np.float64)
        if k.ndim != 1 or k.size < 1:
            raise ValueError("kernel must be a 1-D coefficient sequence")
        if abs(k.sum() - 1.0) > 1e-12:
            raise ValueError("kernel coefficients must sum to 1")


@dataclass(frozen=True)
class Pyramid:
    """Band levels (finest first), a low-pass base, and the kernel used.

    All feature maps are channel-major (3, H, W); level l+1 is half the
    size of level l (ceil division).
    """

    levels: tuple
    base: np.ndarray
    kernel: tuple = DEFAULT_KERNEL

    @property
    def num_levels(self) -> int:
        return len(self.levels)


def _blur(feat: np.ndarray, kernel) -> np.ndarray:
    k = np.asarray(kernel, dtype=np.float64)
    out = ndimage.convolve1d(feat, k, axis=1, mode="nearest")
    return ndimage.convolve1d(out, k, axis=2, mode="nearest")


def _downsample(feat: np.ndarray, kernel) -> np.ndarray:
    return _blur(feat, kernel)[:, ::2, ::2]


def _upsample(feat: np.ndarray, height: int, width: int) -> np.ndarray:
    img_like = np.moveaxis(feat, 0, -1)
    return np.moveaxis(resize_bilinear(img_like, width, height), -1, 0)


def encode(img, cfg: BackboneConfig = BackboneConfig()) -> Pyramid:
    """Decompose an image into band levels plus a low-pass base."""
    arr = check_image(img, "image")
    min_dim = min(arr.shape[0], arr.shape[1])
    if min_dim < 2 ** cfg.num_levels:
        raise ValueError(
            f"image min dimension {min_dim} too small for {cfg.num_levels} "
            f"levels (needs >= {2 ** cfg.num_levels})"
        )
    current = np.moveaxis(arr, -1, 0)
    levels = []
    for _ in range(cfg.num_levels):
        lowpass = _downsample(current, cfg.kernel)
        restored = _upsample(lowpass, current.shape[1], current.shape[2])
        levels.append(current - restored)
        current = lowpass
    return Pyramid(levels=tuple(levels), base=current, kernel=tuple(cfg.kernel))


def _check_structure(pyr: Pyramid) -> None:
    prev = None
    for i, lvl in enumerate(pyr.levels):
        if lvl.ndim != 3 or lvl.shape[0] != 3:
            raise ValueError(f"level {i}: expected (3, H, W), got {lvl.shape}")
        if prev is not None:
            expect = (-(-prev[0] // 2), -(-prev[1] // 2))
            if lvl.shape[1:] != expect:
                raise ValueError(
                    f"level {i}: size {lvl.shape[1:]} does not follow {prev} (expected {expect})"
                )
        prev = lvl.shape[1:]
    expect = (-(-prev[0] // 2), -(-prev[1] // 2))
    if pyr.base.shape != (3, *expect):
        raise ValueError(
            f"base: size {pyr.base.shape} does not follow last level {prev} "
            f"(expected {(3, *expect)})"
        )


def decode(pyr: Pyramid) -> np.ndarray:
    """Collapse a pyramid back to an image; the exact inverse of encode."""
    if pyr.num_levels < 1:
        raise ValueError("pyramid has no levels")
    _check_structure(pyr)
    current = pyr.base
    for band in reversed(pyr.levels):
        current = _upsample(current, band.shape[1], band.shape[2]) + band
    return np.moveaxis(current, 0, -1)


def perturb_level_stats(
    pyr: Pyramid, level: int, delta_mu: float = 0.0, delta_sigma: float = 0.0
) -> Pyramid:
    """Shift one band's per-channel mean/std by constants; other levels untouched."""
    if not 0 <= level < pyr.num_levels:
        raise ValueError(f"level {level} out of range [0, {pyr.num_levels})")
    band = pyr.levels[level]
    stats = channel_stats(band, channel_axis=0)
    new_std = stats.std + delta_sigma
    if np.any(new_std < EPS):
        raise ValueError(f"delta_sigma {delta_sigma} drives a channel std below the floor")
    target = ChannelStats(stats.mean + delta_mu, new_std)
    levels = list(pyr.levels)
    levels[level] = affine_normalize(band, stats, target, channel_axis=0)
    return Pyramid(levels=tuple(levels), base=pyr.base, kernel=pyr.kernel)


def band_rms(img, level: int, cfg: BackboneConfig = BackboneConfig()) -> float:
    """Root-mean-square of one band of an image; the contrast measure."""
    pyr = encode(img, cfg)
    if not 0 <= level < pyr.num_levels:
        raise ValueError(f"level {level} out of range [0, {pyr.num_levels})")
    return float(np.sqrt(np.mean(pyr.levels[level] ** 2)))


@dataclass(frozen=True)
class DehazeResult:
    image: np.ndarray
    prompt: np.ndarray
    report: PromptReport
    traces: tuple  # one AdaptationTrace per band, then one for the base

    @property
    def base_trace(self) -> AdaptationTrace:
        return self.traces[-1]


def dehaze(
    hazy_input,
    clean_source,
    prompt_cfg: PromptConfig = PromptConfig(),
    adapt_cfg: AdaptConfig = AdaptConfig(),
    backbone_cfg: BackboneConfig = BackboneConfig(),
) -> DehazeResult:
    """Full pipeline: prompt, encode both, adapt every level, decode.

    The base participates in adaptation as the deepest level.  The decoded
    result is clamped to [0, 1] at the very end; everything before that
    runs unclamped.
    """
    hazy = check_image(hazy_input, "hazy input")
    prompt_img, report = generate_prompt(clean_source, hazy, prompt_cfg)
    pyr_x = encode(hazy, backbone_cfg)
    pyr_p = encode(prompt_img, backbone_cfg)

    feats_x = list(pyr_x.levels) + [pyr_x.base]
    feats_p = list(pyr_p.levels) + [pyr_p.base]
    adapted, traces = adapt_pyramid_levels(feats_x, feats_p, adapt_cfg)

    out_pyr = Pyramid(
        levels=tuple(adapted[:-1]), base=adapted[-1], kernel=pyr_x.kernel
    )
    restored = np.clip(decode(out_pyr), 0.0, 1.0)
    return DehazeResult(
        image=restored, prompt=prompt_img, report=report, traces=tuple(traces)
    )
