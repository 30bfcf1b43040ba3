"""Input validation helpers shared across the package.

Images are H x W x 3 float arrays (RGB, nominal range [0, 1], values outside
the range are tolerated until encode time).  Feature maps are channel-major
C x H x W float arrays with unbounded range.  Everything is validated into
float64 so downstream statistics are accumulated in double precision.
"""

import numpy as np

__all__ = ["check_image", "check_feature_map", "check_same_shape"]


def check_image(img, name: str = "image") -> np.ndarray:
    """Validate and return an H x W x 3 float64 RGB image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(
            f"{name}: expected an H x W x 3 RGB array, got shape {arr.shape}"
        )
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: empty image (shape {arr.shape})")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains non-finite values")
    return arr


def check_feature_map(feat, name: str = "feature map") -> np.ndarray:
    """Validate and return a channel-major C x H x W float64 feature map."""
    arr = np.asarray(feat, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(
            f"{name}: expected a C x H x W array, got shape {arr.shape}"
        )
    if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
        raise ValueError(f"{name}: empty tensor (shape {arr.shape})")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains non-finite values")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "arrays") -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what}: shape mismatch {a.shape} vs {b.shape}")
