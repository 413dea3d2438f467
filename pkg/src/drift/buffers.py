"""Planar raster buffers with color-space tags.

ImageBuffer is the pixel carrier used across the whole pipeline: a float32
(H, W) or (H, W, 3) array plus a color-space tag. Buffers are immutable
after construction; every public operation returns a new buffer and is
required to keep the data free of NaN/Inf.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class ColorSpace(IntEnum):
    """Color-space tag. Integer values are the on-disk codes of `.lfr`."""

    LINEAR_RGB = 0
    SRGB = 1
    YCBCR = 2
    LUMA = 3
    BAYER = 4


class InvalidImageError(ValueError):
    """Raised when buffer contents violate an ImageBuffer invariant."""


@dataclass(frozen=True)
class ImageBuffer:
    """Immutable planar raster: (H, W) for 1 channel, (H, W, 3) for color.

    Values are float32. Linear-light buffers may exceed 1.0 (HDR headroom);
    display-referred buffers are nominally in [0, 1].
    """

    data: np.ndarray
    colorspace: ColorSpace = ColorSpace.LINEAR_RGB

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.dtype != np.float32:
            arr = arr.astype(np.float32)
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 3:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        else:
            raise InvalidImageError(
                f"expected (H, W) or (H, W, 3) data, got shape {arr.shape}"
            )
        if arr.size == 0:
            raise InvalidImageError("empty image")
        if not np.all(np.isfinite(arr)):
            raise InvalidImageError("image contains NaN or Inf samples")
        if self.colorspace == ColorSpace.BAYER:
            if arr.ndim != 2:
                raise InvalidImageError("Bayer mosaic must be single-channel")
            if arr.shape[0] % 2 or arr.shape[1] % 2:
                raise InvalidImageError(
                    f"Bayer mosaic needs even dimensions, got {arr.shape}"
                )
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "colorspace", ColorSpace(self.colorspace))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def with_data(self, data: np.ndarray, colorspace: ColorSpace | None = None) -> "ImageBuffer":
        """New buffer with replaced samples (and optionally a new tag)."""
        cs = self.colorspace if colorspace is None else colorspace
        return ImageBuffer(data, cs)

    def astype64(self) -> np.ndarray:
        """float64 view of the samples for accumulation-heavy paths."""
        return self.data.astype(np.float64)


def require_same_shape(a: ImageBuffer, b: ImageBuffer, what: str = "images"):
    if a.shape != b.shape:
        raise InvalidImageError(f"{what} differ in shape: {a.shape} vs {b.shape}")


def constant_image(value: float, height: int, width: int, channels: int = 3,
                   colorspace: ColorSpace = ColorSpace.LINEAR_RGB) -> ImageBuffer:
    """Uniform test/fixture image."""
    if channels == 1:
        data = np.full((height, width), value, dtype=np.float32)
    else:
        data = np.full((height, width, channels), value, dtype=np.float32)
    return ImageBuffer(data, colorspace)
