"""Training-free test-time dehazing toolkit.

Pipeline in one line: re-statisticize a haze-free reference image to the
hazy input's patchwise statistics (the visual prompt), encode both with an
invertible multiscale backbone, pull the input's per-level channel
statistics toward the prompt's under sign and outlier guards, and decode.

Functional core lives in the submodules; :mod:`promptdehaze.estimators`
offers fit/transform wrappers; ``promptdehaze`` is also a CLI.
"""

from .adapt import (
    AdaptConfig,
    AdaptationTrace,
    adapt_features,
    adapt_means,
    adapt_pyramid_levels,
    adapt_stds,
)
from .backbone import (
    BackboneConfig,
    DehazeResult,
    Pyramid,
    band_rms,
    decode,
    dehaze,
    encode,
    perturb_level_stats,
)
from .estimators import FeatureAligner, PromptGenerator, PromptDehazer
from .ftx import FtxError, read_ftx, write_ftx
from .haze import (
    AsmParams,
    DarkChannelConfig,
    dark_channel,
    haze_density,
    hazy_region_mask,
    synthesize_haze,
)
from .imageio import load_image, save_image
from .metrics import MetricReport, psnr, ssim
from .prompt import (
    BRANCH_GRAY_WORLD,
    BRANCH_STAT_TRANSFER,
    PatchGrid,
    PromptConfig,
    PromptReport,
    generate_prompt,
    hue_spread,
    match_stats,
    match_stats_grayworld,
    partition,
)
from .stats import (
    EPS,
    ChannelStats,
    affine_normalize,
    channel_stats,
    resize_bilinear,
    rgb_to_hue_saturation,
)

__version__ = "0.1.0"

__all__ = [
    "EPS",
    "AdaptConfig",
    "AdaptationTrace",
    "AsmParams",
    "BRANCH_GRAY_WORLD",
    "BRANCH_STAT_TRANSFER",
    "BackboneConfig",
    "ChannelStats",
    "DarkChannelConfig",
    "DehazeResult",
    "FeatureAligner",
    "FtxError",
    "MetricReport",
    "PatchGrid",
    "PromptConfig",
    "PromptGenerator",
    "PromptReport",
    "Pyramid",
    "PromptDehazer",
    "adapt_features",
    "adapt_means",
    "adapt_pyramid_levels",
    "adapt_stds",
    "affine_normalize",
    "band_rms",
    "channel_stats",
    "dark_channel",
    "decode",
    "dehaze",
    "encode",
    "generate_prompt",
    "haze_density",
    "hazy_region_mask",
    "hue_spread",
    "load_image",
    "match_stats",
    "match_stats_grayworld",
    "partition",
    "perturb_level_stats",
    "psnr",
    "read_ftx",
    "resize_bilinear",
    "rgb_to_hue_saturation",
    "save_image",
    "ssim",
    "synthesize_haze",
    "write_ftx",
]
