"""Piecewise-linear 1D lookup tables on [0, 1].

LUTs are the tuning primitive of the pipeline: monotone or free-form
curves evaluated by linear interpolation between control points. Inputs
are clamped to [0, 1] before evaluation; that clamp is part of the
contract, not a convenience.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .buffers import ImageBuffer, InvalidImageError


class InvalidLutError(ValueError):
    """Raised for malformed control-point lists."""


@dataclass(frozen=True)
class Lut1D:
    """Ordered (x, y) control points, x strictly increasing from 0 to 1."""

    points: tuple

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if len(pts) < 2:
            raise InvalidLutError("LUT needs at least 2 control points")
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise InvalidLutError("LUT endpoints must sit at x=0 and x=1")
        if np.any(np.diff(xs) <= 0):
            raise InvalidLutError("LUT x coordinates must be strictly increasing")
        if np.any(ys < 0.0) or np.any(ys > 1.0):
            raise InvalidLutError("LUT y values must lie in [0, 1]")
        object.__setattr__(self, "points", pts)

    @property
    def xs(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], dtype=np.float64)

    @property
    def ys(self) -> np.ndarray:
        return np.array([p[1] for p in self.points], dtype=np.float64)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        """Evaluate at arbitrary array values; inputs clamped to [0, 1]."""
        v = np.clip(values, 0.0, 1.0)
        return np.interp(v, self.xs, self.ys)

    def is_identity(self) -> bool:
        return all(x == y for x, y in self.points)


IDENTITY_LUT = Lut1D(((0.0, 0.0), (1.0, 1.0)))


def identity_lut() -> Lut1D:
    return IDENTITY_LUT


def apply_lut(plane: ImageBuffer, lut: Lut1D) -> ImageBuffer:
    """Apply a LUT to a single-channel plane."""
    if plane.channels != 1:
        raise InvalidImageError("apply_lut expects a single-channel plane")
    out = lut(plane.data)
    return plane.with_data(out.astype(np.float32))
