"""Reference-based quality metrics (PSNR, SSIM) and the report record.

PSNR is computed on values clamped to [0, 1] by default, matching how
results land in 8-bit files; pass ``clamp=False`` for a pre-clamp
diagnostic reading.  Identical images return a 99 dB sentinel instead of
infinity.  SSIM uses the canonical 11x11 Gaussian window (sigma 1.5),
K1 = 0.01, K2 = 0.03, dynamic range 1, evaluated per channel (valid region
only) and averaged.  Both metrics are evaluated on RGB directly.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .validation import check_image

__all__ = ["PSNR_CAP_DB", "MetricReport", "psnr", "ssim"]

PSNR_CAP_DB = 99.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


def psnr(a, b, clamp: bool = True) -> float:
    """Peak signal-to-noise ratio in dB for unit-range images."""
    x = check_image(a, "first image")
    y = check_image(b, "second image")
    if x.shape != y.shape:
        raise ValueError(f"image shapes differ: {x.shape} vs {y.shape}")
    if clamp:
        x = np.clip(x, 0.0, 1.0)
        y = np.clip(y, 0.0, 1.0)
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, float(10.0 * np.log10(1.0 / mse)))


def _gaussian_kernel_1d(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return k / k.sum()


def _window_mean(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = ndimage.convolve1d(plane, kernel, axis=0, mode="nearest")
    out = ndimage.convolve1d(out, kernel, axis=1, mode="nearest")
    half = _SSIM_WINDOW // 2
    return out[half:-half, half:-half]


def ssim(a, b) -> float:
    """Mean structural similarity, averaged over channels."""
    x = check_image(a, "first image")
    y = check_image(b, "second image")
    if x.shape != y.shape:
        raise ValueError(f"image shapes differ: {x.shape} vs {y.shape}")
    if min(x.shape[0], x.shape[1]) < _SSIM_WINDOW:
        raise ValueError(
            f"images must be at least {_SSIM_WINDOW} pixels on each side for SSIM"
        )
    kernel = _gaussian_kernel_1d(_SSIM_WINDOW, _SSIM_SIGMA)
    c1 = _SSIM_K1**2
    c2 = _SSIM_K2**2

    values = []
    for ch in range(3):
        px, py = x[..., ch], y[..., ch]
        mu_x = _window_mean(px, kernel)
        mu_y = _window_mean(py, kernel)
        var_x = _window_mean(px * px, kernel) - mu_x**2
        var_y = _window_mean(py * py, kernel) - mu_y**2
        cov = _window_mean(px * py, kernel) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
        values.append(np.mean(num / den))
    return float(np.mean(values))


@dataclass(frozen=True)
class MetricReport:
    """PSNR/SSIM against a reference plus dark-channel density readings."""

    psnr: float
    ssim: float
    haze_density_in: float | None = None
    haze_density_out: float | None = None

    def as_dict(self) -> dict:
        out = {"psnr": self.psnr, "ssim": self.ssim}
        if self.haze_density_in is not None:
            out["haze_density_in"] = self.haze_density_in
        if self.haze_density_out is not None:
            out["haze_density_out"] = self.haze_density_out
        return out

    def as_keyvalue(self) -> str:
        return "\n".join(f"{k}={v:.6f}" for k, v in self.as_dict().items()) + "\n"

    def as_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"
