"""EV0/EV- HDR fusion: brightness equalization, deghosting, Mertens fusion.

The entry point is fuse_hdr: warp the short exposure onto the reference,
equalize brightness (divide by the exposure ratio, preserving >1
headroom), deghost local-motion mismatches, then blend with multi-scale
exposure fusion. Fusion weights are computed on each frame's
exposure-referred original values (equalized * ev_ratio, in [0,1]) so
clipped EV0 highlights lose the vote and the short exposure fills them;
the blend itself runs on the equalized linear values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .buffers import ColorSpace, ImageBuffer, InvalidImageError, require_same_shape
from .color import luma
from .homography import Homography
from .pyramid import max_levels, pyr_down, pyr_up
from .burst import warp

WEIGHT_EPS = 1e-12
EXPOSEDNESS_SIGMA = 0.2
# EV0 luma range treated as trustworthy for deghosting decisions
SATURATION_LO = 0.85
SATURATION_HI = 0.98


@dataclass(frozen=True)
class ExposureFrame:
    """A linear-light frame plus its exposure relative to EV0 (EV- = 1/8)."""

    img: ImageBuffer
    ev_ratio: float = 1.0
    iso: float = 100.0

    def __post_init__(self):
        if not np.isfinite(self.ev_ratio) or self.ev_ratio <= 0:
            raise ValueError(f"ev_ratio must be positive, got {self.ev_ratio}")
        if not np.isfinite(self.iso) or self.iso <= 0:
            raise ValueError(f"iso must be positive, got {self.iso}")


def equalize_exposure(frame: ExposureFrame) -> ImageBuffer:
    """Scale to EV0 brightness; values above 1 are kept (HDR headroom)."""
    if frame.ev_ratio == 1.0:
        return frame.img
    out = frame.img.astype64() / frame.ev_ratio
    return frame.img.with_data(out.astype(np.float32))


def _smoothstep(x: np.ndarray, edge0: float, edge1: float) -> np.ndarray:
    if edge1 <= edge0:
        return (x >= edge0).astype(np.float64)
    t = np.clip((x - edge0) / (edge1 - edge0), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def deghost(ref: ImageBuffer, aux: ImageBuffer, tau: float,
            ref_valid: np.ndarray | None = None) -> ImageBuffer:
    """Replace aux with ref where their (smoothed) luma difference exceeds tau.

    alpha ramps 0 -> 1 over [tau, 2*tau] on a 5x5 box-smoothed luma
    difference; tau = 0 falls back to ref everywhere. `ref_valid` (in
    [0,1]) suppresses the fallback where the reference itself cannot be
    trusted, e.g. clipped highlights.
    """
    require_same_shape(ref, aux, "deghost inputs")
    if not (0.0 <= tau <= 1.0):
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    if ref.channels == 3:
        d = np.abs(luma(ref.data) - luma(aux.data))
    else:
        d = np.abs(ref.astype64() - aux.astype64())
    d = ndimage.uniform_filter(d, size=5, mode="nearest")
    alpha = _smoothstep(d, tau, 2.0 * tau)
    if ref_valid is not None:
        alpha = alpha * np.clip(ref_valid, 0.0, 1.0)
    if ref.channels == 3:
        alpha = alpha[:, :, None]
    out = (1.0 - alpha) * aux.astype64() + alpha * ref.astype64()
    return aux.with_data(out.astype(np.float32))


def _contrast(y: np.ndarray) -> np.ndarray:
    lap = ndimage.laplace(y, mode="nearest")
    return np.abs(lap)


def mertens_measures(frame: np.ndarray, exposedness_center: float = 0.5) -> tuple:
    """Contrast, saturation, exposedness of an (H, W, 3) display-domain frame."""
    y = luma(frame)
    contrast = _contrast(y)
    saturation = frame.std(axis=2)
    gauss = np.exp(-((frame - exposedness_center) ** 2) / (2.0 * EXPOSEDNESS_SIGMA ** 2))
    exposedness = gauss[:, :, 0] * gauss[:, :, 1] * gauss[:, :, 2]
    return contrast, saturation, exposedness


def mertens_weights(frames: list, exponents=(1.0, 1.0, 1.0),
                    exposedness_center: float = 0.5) -> list:
    """Per-frame weight planes, normalized to sum to 1 at every pixel."""
    wc, ws, we = (float(e) for e in exponents)
    if wc < 0 or ws < 0 or we < 0:
        raise ValueError("weight exponents must be >= 0")
    raw = []
    for f in frames:
        c, s, e = mertens_measures(f, exposedness_center)
        raw.append(np.power(c, wc) * np.power(s, ws) * np.power(e, we) + WEIGHT_EPS)
    total = np.sum(raw, axis=0)
    return [w / total for w in raw]


def mertens_fuse(frames: list, exponents=(1.0, 1.0, 1.0), n_levels: int | None = None,
                 weight_frames: list | None = None,
                 clamp_envelope: bool = True,
                 exposedness_center: float = 0.5) -> ImageBuffer:
    """Multiresolution exposure fusion of same-shape 3-channel frames.

    Weights come from `weight_frames` when given (display-referred copies
    of the inputs); blending always uses `frames` themselves. Laplacian
    pyramids of the frames are combined under Gaussian pyramids of the
    weights. `clamp_envelope` pins the result to the per-pixel [min, max]
    of the inputs, suppressing blend halos.
    """
    if len(frames) < 2:
        raise InvalidImageError("fusion needs at least 2 frames")
    for f in frames[1:]:
        require_same_shape(frames[0], f, "fusion frames")
    if frames[0].channels != 3:
        raise InvalidImageError("fusion expects 3-channel frames")
    if weight_frames is None:
        wsrc = [f.astype64() for f in frames]
    else:
        if len(weight_frames) != len(frames):
            raise InvalidImageError("weight_frames length mismatch")
        wsrc = [np.asarray(w, dtype=np.float64) for w in weight_frames]

    h, w = frames[0].height, frames[0].width
    if n_levels is None:
        n_levels = max(1, max_levels(w, h))
    weights = mertens_weights(wsrc, exponents, exposedness_center)

    acc = None
    for frame, weight in zip(frames, weights):
        lap = [frame.astype64()]
        for _ in range(n_levels - 1):
            lap.append(pyr_down(lap[-1]))
        gw = [weight]
        for _ in range(n_levels - 1):
            gw.append(pyr_down(gw[-1]))
        bands = []
        for i in range(n_levels - 1):
            bands.append(lap[i] - pyr_up(lap[i + 1], lap[i].shape))
        bands.append(lap[-1])
        contrib = [b * g[:, :, None] for b, g in zip(bands, gw)]
        if acc is None:
            acc = contrib
        else:
            acc = [a + c for a, c in zip(acc, contrib)]

    out = acc[-1]
    for band in reversed(acc[:-1]):
        out = pyr_up(out, band.shape) + band
    if clamp_envelope:
        stack = np.stack([f.astype64() for f in frames], axis=0)
        out = np.clip(out, stack.min(axis=0), stack.max(axis=0))
    return frames[0].with_data(out.astype(np.float32))


def saturation_validity(original: ImageBuffer) -> np.ndarray:
    """1 where the display-referred frame is well-exposed, 0 where clipped."""
    y = ndimage.uniform_filter(luma(original.data), size=5, mode="nearest")
    return 1.0 - _smoothstep(y, SATURATION_LO, SATURATION_HI)


def fuse_hdr(ev0: ExposureFrame, evm: ExposureFrame,
             align: Homography | None = None, tau: float = 0.1,
             exponents=(0.0, 0.0, 1.0), n_levels: int | None = None) -> ImageBuffer:
    """Full EV0 + EV- fusion into one HDR linear image.

    Pipeline: warp EV- onto EV0, equalize brightness, deghost against the
    EV0 reference (skipping clipped regions), Mertens-fuse. Weighting
    defaults to exposedness only: the contrast/saturation measures vanish
    on flat regions, which would hand clipped highlights a 50% vote.
    Output is linear with headroom above 1 wherever the short exposure
    recovered radiance the reference clipped.
    """
    require_same_shape(ev0.img, evm.img, "exposure frames")
    if n_levels is None:
        # the equalized pair is radiometrically consistent, so the blend only
        # needs enough scales to hide weight transitions; deeper pyramids
        # smear radiance across clipping boundaries
        n_levels = min(4, max(1, max_levels(ev0.img.width, ev0.img.height)))
    aux_img = evm.img if align is None else warp(evm.img, align)
    ref_eq = equalize_exposure(ev0)
    aux_eq = equalize_exposure(ExposureFrame(aux_img, evm.ev_ratio, evm.iso))
    valid = saturation_validity(ev0.img)
    aux_dg = deghost(ref_eq, aux_eq, tau, ref_valid=valid)
    wf_ref = np.clip(ref_eq.astype64() * ev0.ev_ratio, 0.0, 1.0)
    wf_aux = np.clip(aux_dg.astype64() * evm.ev_ratio, 0.0, 1.0)
    fused = mertens_fuse([ref_eq, aux_dg], exponents, n_levels,
                         weight_frames=[wf_ref, wf_aux])
    return ImageBuffer(fused.data, ColorSpace.LINEAR_RGB)
