"""Color transforms: full-range BT.601 YCbCr and the display gamma helpers.

The YCbCr matrix is the full-range (JPEG) BT.601 variant. Luma is in
[0, 1] for inputs in [0, 1]; Cb/Cr are centered at 0 in [-0.5, 0.5].
The inverse is the exact matrix inverse, so round-trips are lossless to
float precision.
"""

from __future__ import annotations

import numpy as np

from .buffers import ColorSpace, ImageBuffer, InvalidImageError

# Full-range BT.601 (JPEG) forward matrix, rows = (Y, Cb, Cr).
RGB_TO_YCBCR = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168735891647856, -0.331264108352144, 0.5],
        [0.5, -0.418687589158345, -0.081312410841655],
    ],
    dtype=np.float64,
)

YCBCR_TO_RGB = np.linalg.inv(RGB_TO_YCBCR)

LUMA_WEIGHTS = RGB_TO_YCBCR[0]


def luma(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma of an (H, W, 3) array (any dtype, float64 result)."""
    r = rgb.astype(np.float64, copy=False)
    return r[..., 0] * LUMA_WEIGHTS[0] + r[..., 1] * LUMA_WEIGHTS[1] + r[..., 2] * LUMA_WEIGHTS[2]


def rgb_to_ycbcr_array(rgb: np.ndarray) -> np.ndarray:
    """(H, W, 3) RGB -> (H, W, 3) YCbCr in float64."""
    return rgb.astype(np.float64, copy=False) @ RGB_TO_YCBCR.T


def ycbcr_to_rgb_array(ycc: np.ndarray) -> np.ndarray:
    """(H, W, 3) YCbCr -> (H, W, 3) RGB in float64."""
    return ycc.astype(np.float64, copy=False) @ YCBCR_TO_RGB.T


def rgb_to_ycbcr(img: ImageBuffer) -> ImageBuffer:
    """Convert a 3-channel RGB buffer (linear or display-encoded) to YCbCr."""
    if img.channels != 3:
        raise InvalidImageError(f"YCbCr conversion needs 3 channels, got {img.channels}")
    return ImageBuffer(rgb_to_ycbcr_array(img.data), ColorSpace.YCBCR)


def ycbcr_to_rgb(img: ImageBuffer, colorspace: ColorSpace = ColorSpace.SRGB) -> ImageBuffer:
    """Convert a YCbCr buffer back to RGB; caller picks the RGB tag."""
    if img.channels != 3:
        raise InvalidImageError(f"RGB conversion needs 3 channels, got {img.channels}")
    return ImageBuffer(ycbcr_to_rgb_array(img.data), colorspace)


def encode_gamma(x: np.ndarray, gamma: float = 2.2) -> np.ndarray:
    """Linear -> display with a pure power law; clamps negatives to 0."""
    return np.power(np.maximum(x, 0.0), 1.0 / gamma)


def decode_gamma(x: np.ndarray, gamma: float = 2.2) -> np.ndarray:
    """Display -> linear inverse of encode_gamma."""
    return np.power(np.maximum(x, 0.0), gamma)
