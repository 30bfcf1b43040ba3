"""Scikit-learn style wrappers around the functional pipeline.

The dehazer follows the natural estimator shape of test-time adaptation:
``fit`` captures the haze-free reference image, ``transform`` processes
hazy inputs against it.  Parameters live on ``__init__`` verbatim, so
``get_params``/``set_params``, cloning, and pipeline composition all work.

Inputs can be a single H x W x 3 array or a sequence of them; outputs
match.  Rich per-image results (prompts, gating reports, adaptation
traces) are kept on trailing-underscore attributes after each transform.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import backbone
from .adapt import AdaptConfig, adapt_pyramid_levels
from .haze import DarkChannelConfig
from .prompt import PromptConfig, generate_prompt
from .validation import check_feature_map, check_image

__all__ = ["PromptGenerator", "FeatureAligner", "PromptDehazer"]


def _is_single_image(X) -> bool:
    return isinstance(X, np.ndarray) and X.ndim == 3


class PromptGenerator(BaseEstimator, TransformerMixin):
    """Turn hazy images into visual prompts built from a clean reference.

    ``fit`` stores the haze-free source image; ``transform`` re-statisticizes
    it patch by patch to each input's local statistics (or to gray-world
    targets when the input carries a strong color cast).  Gating reports for
    the last transform are available as ``reports_``.
    """

    def __init__(self, patch_divisor=10, tau=0.005, saturation_floor=0.05,
                 dark_window=15, density_threshold=0.6):
        self.patch_divisor = patch_divisor
        self.tau = tau
        self.saturation_floor = saturation_floor
        self.dark_window = dark_window
        self.density_threshold = density_threshold

    def _config(self) -> PromptConfig:
        return PromptConfig(
            patch_divisor=self.patch_divisor,
            tau=self.tau,
            saturation_floor=self.saturation_floor,
            dark=DarkChannelConfig(self.dark_window, self.density_threshold),
        )

    def fit(self, X, y=None):
        """Store the haze-free reference image (H x W x 3 in [0, 1])."""
        self.prompt_source_ = check_image(X, "prompt source")
        return self

    def transform(self, X):
        if not hasattr(self, "prompt_source_"):
            raise NotFittedError("PromptGenerator: call fit(reference_image) first")
        cfg = self._config()
        single = _is_single_image(X)
        inputs = [X] if single else list(X)
        prompts, reports = [], []
        for img in inputs:
            prompt, report = generate_prompt(self.prompt_source_, img, cfg)
            prompts.append(prompt)
            reports.append(report)
        self.reports_ = reports
        return prompts[0] if single else prompts


class FeatureAligner(BaseEstimator, TransformerMixin):
    """Guarded statistic alignment for externally computed features.

    ``fit`` takes the prompt-side features (one channel-major array, or a
    sequence of per-level arrays); ``transform`` adapts input-side features
    of the same structure.  Adaptation traces for the last transform are
    available as ``traces_``.
    """

    def __init__(self, alpha=2.0, eps=1e-6):
        self.alpha = alpha
        self.eps = eps

    def fit(self, X, y=None):
        single = isinstance(X, np.ndarray)
        levels = [X] if single else list(X)
        self.prompt_levels_ = [check_feature_map(f, "prompt features") for f in levels]
        self._single_level_ = single
        return self

    def transform(self, X):
        if not hasattr(self, "prompt_levels_"):
            raise NotFittedError("FeatureAligner: call fit(prompt_features) first")
        single = isinstance(X, np.ndarray)
        levels = [X] if single else list(X)
        cfg = AdaptConfig(alpha=self.alpha, eps=self.eps)
        adapted, traces = adapt_pyramid_levels(levels, self.prompt_levels_, cfg)
        self.traces_ = traces
        return adapted[0] if single else adapted


class PromptDehazer(BaseEstimator, TransformerMixin):
    """End-to-end test-time dehazer over the built-in multiscale backbone.

    ``fit`` stores the haze-free reference; ``transform`` runs prompt
    generation, per-level feature adaptation, and reconstruction for each
    hazy input.  Full per-image results (``DehazeResult``) from the last
    transform are available as ``results_``.
    """

    def __init__(self, patch_divisor=10, tau=0.005, saturation_floor=0.05,
                 dark_window=15, density_threshold=0.6, alpha=2.0,
                 num_levels=3):
        self.patch_divisor = patch_divisor
        self.tau = tau
        self.saturation_floor = saturation_floor
        self.dark_window = dark_window
        self.density_threshold = density_threshold
        self.alpha = alpha
        self.num_levels = num_levels

    def _configs(self):
        prompt_cfg = PromptConfig(
            patch_divisor=self.patch_divisor,
            tau=self.tau,
            saturation_floor=self.saturation_floor,
            dark=DarkChannelConfig(self.dark_window, self.density_threshold),
        )
        return prompt_cfg, AdaptConfig(alpha=self.alpha), backbone.BackboneConfig(self.num_levels)

    def fit(self, X, y=None):
        """Store the haze-free reference image (H x W x 3 in [0, 1])."""
        self.prompt_source_ = check_image(X, "prompt source")
        return self

    def transform(self, X):
        if not hasattr(self, "prompt_source_"):
            raise NotFittedError("PromptDehazer: call fit(reference_image) first")
        prompt_cfg, adapt_cfg, bb_cfg = self._configs()
        single = _is_single_image(X)
        inputs = [X] if single else list(X)
        results = [
            backbone.dehaze(img, self.prompt_source_, prompt_cfg, adapt_cfg, bb_cfg)
            for img in inputs
        ]
        self.results_ = results
        images = [r.image for r in results]
        return images[0] if single else images
