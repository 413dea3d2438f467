"""Gaussian/Laplacian pyramids with the 5-tap binomial kernel.

Downsampling blurs with [1, 4, 6, 4, 1]/16 (clamped borders) and keeps
the even samples, so level k+1 has ceil(n/2) samples per axis. Expansion
zero-stuffs and blurs with the doubled kernel, normalized by the blurred
sample-indicator so constants survive the borders exactly. Laplacian
reconstruction is algebraically exact; the only error is float rounding.

All arithmetic runs in float64 regardless of the buffer dtype.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.ndimage import correlate1d

from .buffers import ColorSpace, ImageBuffer, InvalidImageError

KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0], dtype=np.float64) / 16.0


class PyramidKind(Enum):
    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"


@dataclass(frozen=True)
class Pyramid:
    """Level 0 is full resolution; each level halves (rounded up)."""

    levels: tuple
    kind: PyramidKind

    def __len__(self) -> int:
        return len(self.levels)


def _blur(arr: np.ndarray) -> np.ndarray:
    """Separable binomial blur with replicated (clamped) borders."""
    out = correlate1d(arr, KERNEL, axis=0, mode="nearest")
    out = correlate1d(out, KERNEL, axis=1, mode="nearest")
    return out


def pyr_down(arr: np.ndarray) -> np.ndarray:
    """Blur then keep even-indexed samples: ceil(n/2) per axis."""
    if arr.ndim == 3:
        out = np.stack([_blur(arr[:, :, c]) for c in range(arr.shape[2])], axis=2)
    else:
        out = _blur(arr)
    return out[::2, ::2]


def pyr_up(arr: np.ndarray, target_shape: tuple) -> np.ndarray:
    """Expand to `target_shape` by zero-stuffing + normalized binomial blur.

    The normalization by the blurred indicator keeps constants constant at
    borders, where plain clamped blurring of the stuffed grid would not.
    """
    th, tw = target_shape[:2]
    if arr.ndim == 3:
        planes = [pyr_up(arr[:, :, c], (th, tw)) for c in range(arr.shape[2])]
        return np.stack(planes, axis=2)
    stuffed = np.zeros((th, tw), dtype=np.float64)
    stuffed[::2, ::2] = arr
    mask = np.zeros((th, tw), dtype=np.float64)
    mask[::2, ::2] = 1.0
    k2 = KERNEL * 2.0
    num = correlate1d(stuffed, k2, axis=0, mode="constant", cval=0.0)
    num = correlate1d(num, k2, axis=1, mode="constant", cval=0.0)
    den = correlate1d(mask, k2, axis=0, mode="constant", cval=0.0)
    den = correlate1d(den, k2, axis=1, mode="constant", cval=0.0)
    return num / den


def max_levels(width: int, height: int) -> int:
    return int(np.floor(np.log2(min(width, height))))


def _check_levels(img: ImageBuffer, n_levels: int):
    if n_levels < 1:
        raise InvalidImageError("pyramid needs at least 1 level")
    cap = max_levels(img.width, img.height)
    if n_levels > cap:
        raise InvalidImageError(
            f"{n_levels} levels too deep for {img.width}x{img.height} (max {cap})"
        )


def _level_colorspace(img: ImageBuffer) -> ColorSpace:
    # halved Bayer dims go odd; pyramid levels of a mosaic are just planes
    if img.colorspace == ColorSpace.BAYER:
        return ColorSpace.LUMA
    return img.colorspace


def build_gaussian(img: ImageBuffer, n_levels: int) -> Pyramid:
    """Gaussian pyramid with n_levels levels (level 0 = source)."""
    _check_levels(img, n_levels)
    levels = [img.astype64()]
    for _ in range(n_levels - 1):
        levels.append(pyr_down(levels[-1]))
    cs = _level_colorspace(img)
    bufs = tuple(ImageBuffer(lv.astype(np.float32), cs) for lv in levels)
    return Pyramid(bufs, PyramidKind.GAUSSIAN)


def build_laplacian(img: ImageBuffer, n_levels: int) -> Pyramid:
    """Laplacian pyramid: n_levels-1 difference bands plus the residual."""
    _check_levels(img, n_levels)
    gauss = [img.astype64()]
    for _ in range(n_levels - 1):
        gauss.append(pyr_down(gauss[-1]))
    bands = []
    for i in range(n_levels - 1):
        bands.append(gauss[i] - pyr_up(gauss[i + 1], gauss[i].shape))
    bands.append(gauss[-1])
    cs = _level_colorspace(img)
    bufs = tuple(ImageBuffer(b.astype(np.float32), cs) for b in bands)
    return Pyramid(bufs, PyramidKind.LAPLACIAN)


def reconstruct(pyr: Pyramid) -> ImageBuffer:
    """Collapse a Laplacian pyramid back to the source image."""
    if pyr.kind != PyramidKind.LAPLACIAN:
        raise InvalidImageError("only Laplacian pyramids reconstruct")
    levels = [lv.astype64() for lv in pyr.levels]
    acc = levels[-1]
    for band in reversed(levels[:-1]):
        acc = pyr_up(acc, band.shape) + band
    return ImageBuffer(acc.astype(np.float32), pyr.levels[0].colorspace)
