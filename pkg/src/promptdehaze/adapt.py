"""Guarded feature-level statistic adaptation.

Encoder features of the hazy input are re-normalized toward the prompt's
per-channel statistics, but never blindly: the mean target only moves when
both means share a sign (and then only downward, to the smaller one), and
the std target only moves when the prompt's std is not an outlier among the
input's channel stds (and then only upward, to the larger one).  Channels
failing a guard keep the input's own statistic, so a useless prompt
degrades the whole operation to an exact no-op.

Every call emits a trace recording, per channel, which rule fired and the
z-score the std guard saw, so the branch behavior is observable in tests
and reports.
"""

from dataclasses import dataclass

import numpy as np

from .stats import EPS, ChannelStats, affine_normalize, channel_stats
from .validation import check_feature_map

__all__ = [
    "AdaptConfig",
    "AdaptationTrace",
    "adapt_means",
    "adapt_stds",
    "adapt_features",
    "adapt_pyramid_levels",
]


@dataclass(frozen=True)
class AdaptConfig:
    """``alpha`` bounds the std z-score; ``eps`` floors denominators."""

    alpha: float = 2.0
    eps: float = EPS

    def __post_init__(self):
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if self.eps <= 0.0:
            raise ValueError("eps must be > 0")


@dataclass(frozen=True)
class AdaptationTrace:
    """Per-channel record of one adaptation.

    ``mean_adapted[i]`` is True when the sign test passed and the min rule
    produced the mean target; ``std_adapted[i]`` is True when the z-score
    guard passed and the max rule produced the std target.  ``z_scores``
    holds the guard statistic per channel.
    """

    mu_target: np.ndarray
    sigma_target: np.ndarray
    mean_adapted: np.ndarray
    std_adapted: np.ndarray
    z_scores: np.ndarray

    @property
    def n_channels(self) -> int:
        return self.mu_target.shape[0]


def adapt_means(mu_prompt, mu_input) -> tuple[np.ndarray, np.ndarray]:
    """Mean targets: min of the two when signs agree, else the input's own.

    A zero mean on either side counts as disagreement (the product test is
    strict), which keeps the conservative fallback.  Returns
    ``(targets, adapted_mask)``.
    """
    mu_p = np.atleast_1d(np.asarray(mu_prompt, dtype=np.float64))
    mu_x = np.atleast_1d(np.asarray(mu_input, dtype=np.float64))
    if mu_p.shape != mu_x.shape:
        raise ValueError(f"mean vectors differ in length: {mu_p.shape} vs {mu_x.shape}")
    same_sign = mu_p * mu_x > 0.0
    target = np.where(same_sign, np.minimum(mu_p, mu_x), mu_x)
    return target, same_sign


def adapt_stds(sigma_prompt, sigma_input, alpha: float = 2.0, eps: float = EPS):
    """Std targets: max of the two while the prompt std stays near the pack.

    The guard compares each prompt std against the distribution of the
    input's channel stds: z = (sigma_p - mean(sigma_x)) / std(sigma_x).
    Channels with z < alpha take max(sigma_p, sigma_x); the rest keep
    sigma_x bit-exactly.  With a single channel the cross-channel std is
    undefined; it is floored at ``eps``, which rejects any prompt std above
    the mean (deliberately conservative).  Returns
    ``(targets, adapted_mask, z_scores)``.
    """
    sig_p = np.atleast_1d(np.asarray(sigma_prompt, dtype=np.float64))
    sig_x = np.atleast_1d(np.asarray(sigma_input, dtype=np.float64))
    if sig_p.shape != sig_x.shape:
        raise ValueError(f"std vectors differ in length: {sig_p.shape} vs {sig_x.shape}")
    spread = max(float(np.std(sig_x)), eps)
    z = (sig_p - sig_x.mean()) / spread
    within_guard = z < alpha
    target = np.where(within_guard, np.maximum(sig_p, sig_x), sig_x)
    return target, within_guard, z


def adapt_features(feat_input, feat_prompt, cfg: AdaptConfig = AdaptConfig()):
    """Re-normalize input features toward guarded prompt statistics.

    Statistics are spatial reductions, so the two maps only need matching
    channel counts.  Returns ``(adapted, trace)`` where ``adapted`` has the
    input's spatial size and the trace records targets and branches.
    """
    f_x = check_feature_map(feat_input, "input features")
    f_p = check_feature_map(feat_prompt, "prompt features")
    if f_x.shape[0] != f_p.shape[0]:
        raise ValueError(
            f"channel count mismatch: input has {f_x.shape[0]}, prompt has {f_p.shape[0]}"
        )
    stats_x = channel_stats(f_x, channel_axis=0)
    stats_p = channel_stats(f_p, channel_axis=0)

    mu_target, mean_adapted = adapt_means(stats_p.mean, stats_x.mean)
    sigma_target, std_adapted, z = adapt_stds(
        stats_p.std, stats_x.std, alpha=cfg.alpha, eps=cfg.eps
    )

    target = ChannelStats(mu_target, sigma_target)
    adapted = affine_normalize(f_x, stats_x, target, channel_axis=0)
    trace = AdaptationTrace(
        mu_target=mu_target,
        sigma_target=sigma_target,
        mean_adapted=mean_adapted,
        std_adapted=std_adapted,
        z_scores=z,
    )
    return adapted, trace


def adapt_pyramid_levels(levels_input, levels_prompt, cfg: AdaptConfig = AdaptConfig()):
    """Apply :func:`adapt_features` independently at each level.

    ``levels_input`` and ``levels_prompt`` are equal-length sequences of
    channel-major feature maps with matching channel counts per level.
    Returns ``(adapted_levels, traces)``.
    """
    if len(levels_input) != len(levels_prompt):
        raise ValueError(
            f"level count mismatch: {len(levels_input)} vs {len(levels_prompt)}"
        )
    adapted_levels = []
    traces = []
    for lvl, (f_x, f_p) in enumerate(zip(levels_input, levels_prompt)):
        try:
            adapted, trace = adapt_features(f_x, f_p, cfg)
        except ValueError as exc:
            raise ValueError(f"level {lvl}: {exc}") from exc
        adapted_levels.append(adapted)
        traces.append(trace)
    return adapted_levels, traces
