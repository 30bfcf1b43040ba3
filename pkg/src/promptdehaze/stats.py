"""Per-channel statistics and the shared affine re-normalization kernel.

Every normalization in this package (patchwise image statistic transfer,
gray-world balancing, guarded feature adaptation) is the same affine map

    out = to_std * (x - from_mean) / from_std + to_mean

applied per channel, so it lives here once.  Standard deviations are
population (divide-by-N) and floored at ``EPS`` so the map is always
defined, even on flat patches such as sky regions.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EPS",
    "ChannelStats",
    "channel_stats",
    "affine_normalize",
    "resize_bilinear",
    "rgb_to_hue_saturation",
]

# Floor for standard deviations.  Keeps the normalization kernel defined on
# zero-variance channels; applied at computation time, never at use time.
EPS = 1e-6


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel mean and (floored) population standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        std = np.atleast_1d(np.asarray(self.std, dtype=np.float64))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError(
                f"mean/std must be equal-length vectors, got {mean.shape} and {std.shape}"
            )
        if np.any(std < EPS):
            raise ValueError(f"std components must be >= {EPS}")

    @property
    def n_channels(self) -> int:
        return self.mean.shape[0]

    def grayworld(self) -> "ChannelStats":
        """Channel-averaged stats broadcast back to all channels."""
        mu = np.full_like(self.mean, self.mean.mean())
        sigma = np.full_like(self.std, max(EPS, self.std.mean()))
        return ChannelStats(mu, sigma)


def channel_stats(x, channel_axis: int = -1) -> ChannelStats:
    """Mean and population std of each channel over the spatial axes.

    ``channel_axis=-1`` fits H x W x C images, ``channel_axis=0`` fits
    channel-major feature maps.  Accumulation is float64 regardless of the
    input dtype; stds below ``EPS`` are floored.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("channel_stats: empty tensor")
    axis = channel_axis % arr.ndim
    reduce_axes = tuple(i for i in range(arr.ndim) if i != axis)
    mean = arr.mean(axis=reduce_axes)
    std = np.maximum(arr.std(axis=reduce_axes), EPS)
    return ChannelStats(mean, std)


def _channel_shape(ndim: int, channel_axis: int, n_channels: int):
    shape = [1] * ndim
    shape[channel_axis % ndim] = n_channels
    return tuple(shape)


def affine_normalize(x, src: ChannelStats, dst: ChannelStats, channel_axis: int = -1) -> np.ndarray:
    """Remap each channel of ``x`` from ``src`` statistics to ``dst`` statistics.

    When ``src == channel_stats(x)`` the output's statistics equal ``dst``.
    Identical ``src``/``dst`` short-circuits to an exact copy so the
    identity case is bit-exact rather than merely close.
    """
    arr = np.asarray(x, dtype=np.float64)
    axis = channel_axis % arr.ndim
    n = arr.shape[axis]
    if src.n_channels != n or dst.n_channels != n:
        raise ValueError(
            f"channel count mismatch: tensor has {n}, stats have "
            f"{src.n_channels} and {dst.n_channels}"
        )
    if np.array_equal(src.mean, dst.mean) and np.array_equal(src.std, dst.std):
        return arr.copy()
    shape = _channel_shape(arr.ndim, axis, n)
    scale = (dst.std / src.std).reshape(shape)
    shift = (dst.mean - (dst.std / src.std) * src.mean).reshape(shape)
    return arr * scale + shift


def resize_bilinear(img, new_w: int, new_h: int) -> np.ndarray:
    """Bilinear resize with pixel-center alignment (half-pixel offsets).

    Sample position for output pixel j is (j + 0.5) * in/out - 0.5, clamped
    to the input grid; a same-size call reproduces the input exactly.
    """
    arr = np.asarray(img, dtype=np.float64)
    if new_w < 1 or new_h < 1:
        raise ValueError(f"resize_bilinear: target size {new_w}x{new_h} invalid")
    h, w = arr.shape[0], arr.shape[1]

    def _axis_coords(n_in, n_out):
        pos = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
        pos = np.clip(pos, 0.0, n_in - 1.0)
        lo = np.floor(pos).astype(np.intp)
        hi = np.minimum(lo + 1, n_in - 1)
        frac = pos - lo
        return lo, hi, frac

    y0, y1, fy = _axis_coords(h, new_h)
    x0, x1, fx = _axis_coords(w, new_w)

    # broadcast fractions over any trailing (channel) axes
    tail = (1,) * (arr.ndim - 2)
    fy = fy.reshape(-1, 1, *tail)
    fx = fx.reshape(1, -1, *tail)

    top = arr[np.ix_(y0, x0)] * (1.0 - fx) + arr[np.ix_(y0, x1)] * fx
    bottom = arr[np.ix_(y1, x0)] * (1.0 - fx) + arr[np.ix_(y1, x1)] * fx
    return top * (1.0 - fy) + bottom * fy


def rgb_to_hue_saturation(img) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel HSV hue in [0, 1) and saturation in [0, 1].

    Inputs are clamped to [0, 1] first.  Achromatic pixels (max == min,
    including black) get hue 0 and saturation 0.
    """
    arr = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    cmax = arr.max(axis=-1)
    cmin = arr.min(axis=-1)
    delta = cmax - cmin

    chromatic = delta > 0.0
    safe_delta = np.where(chromatic, delta, 1.0)

    hue = np.zeros_like(cmax)
    is_r = chromatic & (cmax == r)
    is_g = chromatic & ~is_r & (cmax == g)
    is_b = chromatic & ~is_r & ~is_g
    hue[is_r] = ((g - b)[is_r] / safe_delta[is_r]) % 6.0
    hue[is_g] = (b - r)[is_g] / safe_delta[is_g] + 2.0
    hue[is_b] = (r - g)[is_b] / safe_delta[is_b] + 4.0
    hue = (hue / 6.0) % 1.0

    saturation = np.where(cmax > 0.0, delta / np.where(cmax > 0.0, cmax, 1.0), 0.0)
    return hue, saturation
