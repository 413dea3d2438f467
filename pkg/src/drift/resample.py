"""Bilinear resampling with pixel-center alignment and clamped borders.

The sample-grid convention is the half-pixel-center one: output pixel i
reads source coordinate (i + 0.5) * scale - 0.5. Resizing to the same
size is therefore an exact identity, and a 2x2 checkerboard downscaled
to 1x1 averages all four samples.
"""

from __future__ import annotations

import numpy as np

from .buffers import ImageBuffer, InvalidImageError


def bilinear_sample(data: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample (H, W[, C]) data at float coordinates, clamping at borders.

    xs/ys are same-shaped coordinate arrays in pixel units (x = column).
    Returns float64 samples with the coordinate arrays' shape (plus a
    trailing channel axis for color data).
    """
    h, w = data.shape[:2]
    x = np.clip(xs, 0.0, w - 1.0)
    y = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    if data.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    d = data.astype(np.float64, copy=False)
    top = d[y0, x0] * (1.0 - fx) + d[y0, x1] * fx
    bot = d[y1, x0] * (1.0 - fx) + d[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def resize_bilinear(img: ImageBuffer, new_w: int, new_h: int) -> ImageBuffer:
    """Resize to (new_w, new_h); same-size calls return the image unchanged."""
    if new_w < 1 or new_h < 1:
        raise InvalidImageError(f"target size must be >= 1, got {new_w}x{new_h}")
    if new_w == img.width and new_h == img.height:
        return img
    sx = img.width / new_w
    sy = img.height / new_h
    xs = (np.arange(new_w, dtype=np.float64) + 0.5) * sx - 0.5
    ys = (np.arange(new_h, dtype=np.float64) + 0.5) * sy - 0.5
    gx, gy = np.meshgrid(xs, ys)
    out = bilinear_sample(img.data, gx, gy)
    return img.with_data(out.astype(np.float32))


def resize_to_long_edge(img: ImageBuffer, long_edge: int) -> ImageBuffer:
    """Downscale so the longer side is at most `long_edge`; never upscales."""
    longest = max(img.width, img.height)
    if longest <= long_edge:
        return img
    scale = long_edge / longest
    new_w = max(1, int(round(img.width * scale)))
    new_h = max(1, int(round(img.height * scale)))
    return resize_bilinear(img, new_w, new_h)


def resize_to_max_pixels(img: ImageBuffer, max_pixels: int) -> ImageBuffer:
    """Downscale so width*height is at most `max_pixels`; never upscales."""
    n = img.width * img.height
    if n <= max_pixels:
        return img
    scale = (max_pixels / n) ** 0.5
    new_w = max(1, int(img.width * scale))
    new_h = max(1, int(img.height * scale))
    return resize_bilinear(img, new_w, new_h)
