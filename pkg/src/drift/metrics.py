"""Quality metrics and training-objective functionals.

PSNR/SSIM for [0,1] images, the feature-space perceptual loss over a
pluggable layered extractor (pre-activation features, L1 distance), the
weighted generator objective, and the dual-target tone-map loss. The
shipped extractor is a fixed seeded stack of bias-free convolutions;
nothing here trains or differentiates.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate, correlate1d

from .buffers import ImageBuffer, InvalidImageError, require_same_shape

PSNR_CAP_DB = 100.0
PSNR_MSE_FLOOR = 1e-10
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_SIGMA = 1.5
SSIM_WINDOW = 11

FXW_MAGIC = b"FXW1"


def _as_chw(img) -> np.ndarray:
    """Accept ImageBuffer or array; return (C, H, W) float64."""
    data = img.data if isinstance(img, ImageBuffer) else np.asarray(img)
    data = data.astype(np.float64)
    if data.ndim == 2:
        return data[None, :, :]
    return np.moveaxis(data, 2, 0)


def mse(a, b) -> float:
    da, db = _as_chw(a), _as_chw(b)
    if da.shape != db.shape:
        raise InvalidImageError(f"shape mismatch: {da.shape} vs {db.shape}")
    return float(np.mean((da - db) ** 2))


def psnr(a, b) -> float:
    """Peak SNR in dB for [0,1] data, capped at 100 dB for near-zero MSE."""
    err = mse(a, b)
    if err < PSNR_MSE_FLOOR:
        return PSNR_CAP_DB
    return 10.0 * math.log10(1.0 / err)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


def _win_filter(p: np.ndarray, k: np.ndarray) -> np.ndarray:
    out = correlate1d(p, k, axis=0, mode="reflect")
    return correlate1d(out, k, axis=1, mode="reflect")


def ssim(a, b) -> float:
    """Mean SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, L=1."""
    da, db = _as_chw(a), _as_chw(b)
    if da.shape != db.shape:
        raise InvalidImageError(f"shape mismatch: {da.shape} vs {db.shape}")
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    k = _gaussian_window()
    vals = []
    for pa, pb in zip(da, db):
        mu_a = _win_filter(pa, k)
        mu_b = _win_filter(pb, k)
        var_a = np.maximum(_win_filter(pa * pa, k) - mu_a ** 2, 0.0)
        var_b = np.maximum(_win_filter(pb * pb, k) - mu_b ** 2, 0.0)
        cov = _win_filter(pa * pb, k) - mu_a * mu_b
        num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
        den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
        vals.append(np.mean(num / den))
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# layered feature extractors
# ---------------------------------------------------------------------------

class IdentityExtractor:
    """Single stage whose features are the image itself."""

    n_stages = 1

    def extract(self, img) -> list:
        return [_as_chw(img)]


@dataclass(frozen=True)
class ConvFeatureExtractor:
    """Fixed stack of bias-free strided convolutions.

    Stage i output (pre-activation) is the feature tensor; a leaky-ReLU
    (or none, for linear stacks) feeds the next stage. Deterministic for
    fixed weights; no training anywhere.
    """

    stage_weights: tuple          # each (out_c, in_c, kh, kw) float64
    stride: int = 2
    activation: str = "leaky_relu"

    def __post_init__(self):
        ws = tuple(np.ascontiguousarray(w, dtype=np.float64) for w in self.stage_weights)
        if not ws:
            raise ValueError("extractor needs at least one stage")
        for i, w in enumerate(ws):
            if w.ndim != 4:
                raise ValueError(f"stage {i} weights must be 4D")
            if i > 0 and w.shape[1] != ws[i - 1].shape[0]:
                raise ValueError(f"stage {i} input channels mismatch")
        if self.activation not in ("leaky_relu", "linear"):
            raise ValueError(f"unknown activation {self.activation!r}")
        for w in ws:
            w.setflags(write=False)
        object.__setattr__(self, "stage_weights", ws)

    @property
    def n_stages(self) -> int:
        return len(self.stage_weights)

    def _conv(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        out_c, in_c, kh, kw = w.shape
        if x.shape[0] != in_c:
            raise InvalidImageError(
                f"extractor expects {in_c} channels, got {x.shape[0]}"
            )
        out = np.empty((out_c, x.shape[1], x.shape[2]), dtype=np.float64)
        for o in range(out_c):
            acc = np.zeros(x.shape[1:], dtype=np.float64)
            for c in range(in_c):
                acc += correlate(x[c], w[o, c], mode="reflect")
            out[o] = acc
        return out[:, ::self.stride, ::self.stride]

    def extract(self, img) -> list:
        x = _as_chw(img)
        feats = []
        for w in self.stage_weights:
            pre = self._conv(x, w)
            feats.append(pre)
            if self.activation == "leaky_relu":
                x = np.where(pre > 0, pre, 0.2 * pre)
            else:
                x = pre
        return feats


def make_default_extractor(seed: int = 0, in_channels: int = 3) -> ConvFeatureExtractor:
    """Seeded 3-stage extractor: 3 -> 8 -> 16 -> 16 channels, 3x3 kernels."""
    rng = np.random.default_rng(seed)
    dims = [(8, in_channels), (16, 8), (16, 16)]
    weights = []
    for out_c, in_c in dims:
        fan_in = in_c * 9
        weights.append(rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(out_c, in_c, 3, 3)))
    return ConvFeatureExtractor(tuple(weights))


def write_extractor(fx: ConvFeatureExtractor, path) -> None:
    with open(Path(path), "wb") as f:
        f.write(FXW_MAGIC + struct.pack("<I", fx.n_stages))
        for w in fx.stage_weights:
            f.write(struct.pack("<IIII", *w.shape))
            f.write(w.astype("<f4").tobytes())


def read_extractor(path) -> ConvFeatureExtractor:
    blob = Path(path).read_bytes()
    if len(blob) < 8 or blob[:4] != FXW_MAGIC:
        raise ValueError(f"{path}: not an FXW1 file")
    (n_stages,) = struct.unpack("<I", blob[4:8])
    off = 8
    weights = []
    for _ in range(n_stages):
        shape = struct.unpack("<IIII", blob[off:off + 16])
        off += 16
        count = int(np.prod(shape))
        w = np.frombuffer(blob, dtype="<f4", count=count, offset=off).reshape(shape)
        off += count * 4
        weights.append(w.astype(np.float64))
    if off != len(blob):
        raise ValueError(f"{path}: trailing bytes")
    return ConvFeatureExtractor(tuple(weights))


# ---------------------------------------------------------------------------
# loss functionals
# ---------------------------------------------------------------------------

def apl(fx, a, b, reduction: str = "mean") -> float:
    """Layered perceptual loss: L1 between pre-activation features.

    Per-stage mean reduction by default (resolution-independent); "sum"
    reduces each stage by a raw sum instead.
    """
    da, db = _as_chw(a), _as_chw(b)
    if da.shape != db.shape:
        raise InvalidImageError(f"shape mismatch: {da.shape} vs {db.shape}")
    if reduction not in ("mean", "sum"):
        raise ValueError(f"unknown reduction {reduction!r}")
    fa = fx.extract(a)
    fb = fx.extract(b)
    total = 0.0
    for ta, tb in zip(fa, fb):
        diff = np.abs(ta - tb)
        total += float(diff.mean() if reduction == "mean" else diff.sum())
    return total


@dataclass(frozen=True)
class LossWeights:
    lambda1: float = 0.0
    lambda2: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.lambda1) and math.isfinite(self.lambda2)):
            raise ValueError("loss weights must be finite")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("loss weights must be >= 0")


def generator_objective(data_loss: float, gan_loss: float, apl_loss: float,
                        w: LossWeights) -> float:
    """data + lambda1 * gan + lambda2 * apl."""
    terms = (data_loss, gan_loss, apl_loss)
    if not all(math.isfinite(t) for t in terms):
        raise ValueError(f"non-finite loss term in {terms}")
    return data_loss + w.lambda1 * gan_loss + w.lambda2 * apl_loss


def l1(a, b) -> float:
    da, db = _as_chw(a), _as_chw(b)
    if da.shape != db.shape:
        raise InvalidImageError(f"shape mismatch: {da.shape} vs {db.shape}")
    return float(np.mean(np.abs(da - db)))


def tonemap_loss(i_img, i_tilde, y0, y1, strict_equation: bool = False) -> float:
    """Dual-target loss: {L1, 1-SSIM} of (I, y0) plus (I~, y1).

    `strict_equation` scores both target terms against the plain output I
    instead of pairing the enhanced output with the enhanced target.
    """
    for other in (i_tilde, y0, y1):
        if _as_chw(i_img).shape != _as_chw(other).shape:
            raise InvalidImageError("tone-map loss inputs disagree in shape")
    second = i_img if strict_equation else i_tilde
    total = l1(i_img, y0) + (1.0 - ssim(i_img, y0))
    total += l1(second, y1) + (1.0 - ssim(second, y1))
    return float(total)
