"""Visual prompt generation: patchwise statistic transfer with a gray-world gate.

A prompt is a haze-free reference image re-statisticized so that every
patch carries the hazy input's local channel statistics.  Because haze with
locally constant transmission is an affine map per patch, transferring the
per-patch mean/std reproduces that haze exactly on the reference content.

When the input carries a dominant color cast (detected as a small circular
spread of hue over the hazy, sufficiently saturated pixels) the transfer
targets are averaged across channels instead (gray-world assumption), so
the cast is not copied into the prompt.
"""

from dataclasses import dataclass, field

import numpy as np

from .haze import DarkChannelConfig, hazy_region_mask
from .stats import ChannelStats, affine_normalize, channel_stats, resize_bilinear, rgb_to_hue_saturation
from .validation import check_image

__all__ = [
    "PromptConfig",
    "PatchGrid",
    "PromptReport",
    "BRANCH_STAT_TRANSFER",
    "BRANCH_GRAY_WORLD",
    "partition",
    "hue_spread",
    "match_stats",
    "match_stats_grayworld",
    "generate_prompt",
]

BRANCH_STAT_TRANSFER = "stat-transfer"
BRANCH_GRAY_WORLD = "gray-world"


@dataclass(frozen=True)
class PromptConfig:
    """Tunables for prompt generation.

    Patch side is ``width // patch_divisor``; ``tau`` is the hue-spread
    threshold below which the gray-world branch fires.  Pixels darker than
    the dark-channel density threshold or less saturated than
    ``saturation_floor`` are excluded from the hue-spread measurement.
    """

    patch_divisor: int = 10
    tau: float = 0.005
    saturation_floor: float = 0.05
    dark: DarkChannelConfig = field(default_factory=DarkChannelConfig)

    def __post_init__(self):
        if self.patch_divisor < 1:
            raise ValueError("patch_divisor must be >= 1")
        if self.tau < 0.0:
            raise ValueError("tau must be >= 0")
        if not 0.0 <= self.saturation_floor <= 1.0:
            raise ValueError("saturation_floor must lie in [0, 1]")


@dataclass(frozen=True)
class PatchGrid:
    """Non-overlapping rectangles tiling an image.

    Regions are (y0, y1, x0, x1) half-open slices.  All rows/columns have
    exact ``side`` length except the trailing ones, which absorb the
    remainder pixels so the union covers the image without padding.
    """

    side: int
    height: int
    width: int
    regions: tuple

    def __len__(self):
        return len(self.regions)


def partition(shape_or_img, side: int) -> PatchGrid:
    """Tile an image (or (H, W) pair) into square-ish patches of ``side``.

    A side larger than the image degenerates to a single region covering
    everything.
    """
    if side < 1:
        raise ValueError(f"patch side must be >= 1, got {side}")
    if isinstance(shape_or_img, tuple):
        h, w = shape_or_img
    else:
        arr = np.asarray(shape_or_img)
        h, w = arr.shape[0], arr.shape[1]
    n_rows = max(1, h // side)
    n_cols = max(1, w // side)
    row_edges = [i * side for i in range(n_rows)] + [h]
    col_edges = [j * side for j in range(n_cols)] + [w]
    regions = tuple(
        (row_edges[i], row_edges[i + 1], col_edges[j], col_edges[j + 1])
        for i in range(n_rows)
        for j in range(n_cols)
    )
    return PatchGrid(side=side, height=h, width=w, regions=regions)


def hue_spread(img, cfg: PromptConfig = PromptConfig()) -> float:
    """Circular spread of hue over the hazy, saturated pixels.

    Computed as 1 - |mean of unit phasors exp(2*pi*i*hue)|: 0 when every
    qualifying pixel shares one hue (a dominant cast), approaching 1 when
    hues cover the circle uniformly.  Returns 0 when no pixel qualifies.
    """
    arr = check_image(img, "image")
    hue, sat = rgb_to_hue_saturation(arr)
    mask = hazy_region_mask(arr, cfg.dark) & (sat >= cfg.saturation_floor)
    if not mask.any():
        return 0.0
    phasors = np.exp(2j * np.pi * hue[mask])
    return max(0.0, float(1.0 - np.abs(phasors.mean())))


def match_stats(content, reference) -> np.ndarray:
    """Give ``content`` the per-channel mean/std of ``reference``."""
    c = check_image(content, "content patch")
    r = check_image(reference, "reference patch")
    return affine_normalize(c, channel_stats(c), channel_stats(r))


def match_stats_grayworld(content, reference_stats: ChannelStats) -> np.ndarray:
    """Like :func:`match_stats` but with channel-averaged targets.

    The target mean/std are the averages of the reference's channel means
    and stds, broadcast to all three channels, so the output is color
    balanced regardless of any cast in the reference.
    """
    c = check_image(content, "content patch")
    return affine_normalize(c, channel_stats(c), reference_stats.grayworld())


@dataclass(frozen=True)
class PromptReport:
    """What the gate saw and which branch generated the prompt."""

    hue_spread: float
    tau: float
    branch: str
    patch_side: int
    n_patches: int

    def as_dict(self) -> dict:
        return {
            "hue_spread": self.hue_spread,
            "tau": self.tau,
            "branch": self.branch,
            "patch_side": self.patch_side,
            "n_patches": self.n_patches,
        }


def generate_prompt(clean_source, hazy_input, cfg: PromptConfig = PromptConfig()):
    """Build the visual prompt for ``hazy_input`` from ``clean_source``.

    The source is resized to the input's resolution, both are tiled with
    side ``width // patch_divisor``, and each source patch is remapped to
    the matching input patch's statistics.  The gate is evaluated once per
    image: hue spread >= tau keeps the plain transfer, below tau every
    patch uses gray-world targets instead.

    Returns ``(prompt, report)``.
    """
    hazy = check_image(hazy_input, "hazy input")
    source = check_image(clean_source, "prompt source")
    h, w = hazy.shape[0], hazy.shape[1]
    side = w // cfg.patch_divisor
    if side < 1:
        raise ValueError(
            f"image width {w} with patch_divisor {cfg.patch_divisor} "
            "leaves no room for a patch"
        )

    if source.shape[:2] != (h, w):
        source = resize_bilinear(source, w, h)

    spread = hue_spread(hazy, cfg)
    use_transfer = spread >= cfg.tau
    branch = BRANCH_STAT_TRANSFER if use_transfer else BRANCH_GRAY_WORLD

    grid = partition((h, w), side)
    prompt = np.empty_like(hazy)
    for y0, y1, x0, x1 in grid.regions:
        src_patch = source[y0:y1, x0:x1]
        ref_patch = hazy[y0:y1, x0:x1]
        if use_transfer:
            prompt[y0:y1, x0:x1] = match_stats(src_patch, ref_patch)
        else:
            prompt[y0:y1, x0:x1] = match_stats_grayworld(
                src_patch, channel_stats(ref_patch)
            )

    report = PromptReport(
        hue_spread=spread,
        tau=cfg.tau,
        branch=branch,
        patch_side=side,
        n_patches=len(grid),
    )
    return prompt, report
