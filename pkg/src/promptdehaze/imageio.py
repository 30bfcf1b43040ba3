"""8-bit image file I/O (PNG and binary PPM).

Encoding clamps to [0, 1], scales by 255 and rounds half to even, so the
float-to-file quantization is a fixed, testable rule.  Decoding maps back
to float64 in [0, 1].
"""

from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .validation import check_image

__all__ = ["FORMATS", "to_uint8", "from_uint8", "load_image", "save_image"]

FORMATS = ("png", "ppm")


def to_uint8(img) -> np.ndarray:
    arr = check_image(img, "image")
    return np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)


def from_uint8(raw) -> np.ndarray:
    return np.asarray(raw, dtype=np.float64) / 255.0


def load_image(path) -> np.ndarray:
    """Read any PIL-supported raster file as H x W x 3 float64 in [0, 1]."""
    with PILImage.open(path) as im:
        rgb = im.convert("RGB")
        return from_uint8(np.asarray(rgb, dtype=np.uint8))


def save_image(path, img, fmt: str | None = None) -> Path:
    """Write an image as 8-bit PNG or PPM; the extension follows ``fmt``."""
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower() or "png"
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise ValueError(f"unsupported format {fmt!r}, expected one of {FORMATS}")
    if path.suffix.lstrip(".").lower() != fmt:
        path = path.with_suffix(f".{fmt}")
    data = to_uint8(img)
    if fmt == "ppm":
        h, w = data.shape[0], data.shape[1]
        with open(path, "wb") as fh:
            fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
            fh.write(data.tobytes())
    else:
        PILImage.fromarray(data, mode="RGB").save(path, format="PNG")
    return path
