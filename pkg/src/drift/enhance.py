"""Tunable tone enhancement: map modulation, fusion, and map providers.

The fusion algebra in YCbCr:

    w~  = LUT_w(W)                    s0~ = LUT_0(S0_Y)   s1~ = LUT_1(S1_Y)
    I_Y = w~ * s0~ + (1 - w~) * s1~
    I_C = W_c0 * S0_C + W_c1 * S1_C
    G~  = (1 - S) + S * G
    I~_Y = I_Y * G~                   I~_C = I_C

Identity LUTs and strength 1 leave the maps fully applied; strength 0
disables contrast gain entirely (G~ == 1). Map providers: an analytic
oracle that inverts the algebra against reference targets, a noise-aware
heuristic, and a `.tmaps` file container.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .buffers import ColorSpace, ImageBuffer
from .color import rgb_to_ycbcr_array, ycbcr_to_rgb_array
from .lut import Lut1D, identity_lut
from .tonemap_lite import ExposurePair, GlobalContext

DEFAULT_G_BOUNDS = (0.25, 4.0)
DEGENERATE_EPS = 1e-3
DEFAULT_STRENGTH = 1.0

TMAPS_MAGIC = b"TMP1"


class ShapeMismatchError(ValueError):
    pass


class UnknownCategoryError(KeyError):
    pass


@dataclass(frozen=True)
class ToneMaps:
    """Fusion weight planes and the luma contrast gain map."""

    w_y: np.ndarray
    w_c0: np.ndarray
    w_c1: np.ndarray
    g: np.ndarray
    g_bounds: tuple = DEFAULT_G_BOUNDS
    provider: str = "unknown"

    def __post_init__(self):
        shape = None
        for name in ("w_y", "w_c0", "w_c1", "g"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float32)
            if arr.ndim != 2:
                raise ValueError(f"{name} must be a 2D plane")
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise ShapeMismatchError("tone map planes disagree in shape")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("w_y", "w_c0", "w_c1"):
            arr = getattr(self, name)
            if arr.min() < -1e-6 or arr.max() > 1 + 1e-6:
                raise ValueError(f"{name} must lie in [0, 1]")
        lo, hi = self.g_bounds
        if self.g.min() < lo - 1e-6 or self.g.max() > hi + 1e-6:
            raise ValueError(f"gain map must lie in [{lo}, {hi}]")

    @property
    def shape(self) -> tuple:
        return self.w_y.shape

    def crop(self, y0: int, y1: int, x0: int, x1: int) -> "ToneMaps":
        return ToneMaps(
            self.w_y[y0:y1, x0:x1], self.w_c0[y0:y1, x0:x1],
            self.w_c1[y0:y1, x0:x1], self.g[y0:y1, x0:x1],
            self.g_bounds, self.provider,
        )


@dataclass(frozen=True)
class TuningProfile:
    """Inference-time knobs: three LUTs plus a strength scalar or plane."""

    lut_weight: Lut1D = field(default_factory=identity_lut)
    lut_exp0: Lut1D = field(default_factory=identity_lut)
    lut_exp1: Lut1D = field(default_factory=identity_lut)
    strength: float | np.ndarray = DEFAULT_STRENGTH

    def __post_init__(self):
        s = self.strength
        if isinstance(s, np.ndarray):
            if s.ndim != 2:
                raise ValueError("strength map must be 2D")
            if s.min() < 0.0 or s.max() > 1.0:
                raise ValueError("strength must lie in [0, 1]")
            s = np.ascontiguousarray(s, dtype=np.float32)
            s.setflags(write=False)
            object.__setattr__(self, "strength", s)
        else:
            s = float(s)
            if not (0.0 <= s <= 1.0):
                raise ValueError("strength must lie in [0, 1]")
            object.__setattr__(self, "strength", s)

    def is_identity(self) -> bool:
        return (
            self.lut_weight.is_identity()
            and self.lut_exp0.is_identity()
            and self.lut_exp1.is_identity()
            and np.isscalar(self.strength)
            and self.strength == DEFAULT_STRENGTH
        )


def default_profile() -> TuningProfile:
    return TuningProfile()


@dataclass(frozen=True)
class CaptureMetadata:
    sensor_type: str
    pipeline_type: str
    iso: float
    exposure_time: float

    def __post_init__(self):
        if not np.isfinite(self.iso) or self.iso <= 0:
            raise ValueError("iso must be positive")
        if not np.isfinite(self.exposure_time) or self.exposure_time <= 0:
            raise ValueError("exposure_time must be positive")


@dataclass(frozen=True)
class MetadataRegistry:
    """Closed categorical sets + normalization constants.

    Feature layout: [sensor one-hot | pipeline one-hot | iso_n | exp_n].
    iso_n = log2(iso/50)/6 and exp_n = (log2(t)+10)/10, both clamped
    to [0, 1] (ISO 50..3200, exposure 1/1024 s..1 s).
    """

    sensor_types: tuple = ("main", "ultrawide", "tele")
    pipeline_types: tuple = ("denoise", "sr4")
    iso_base: float = 50.0
    iso_stops: float = 6.0
    exp_floor_stops: float = 10.0

    @property
    def n_features(self) -> int:
        return len(self.sensor_types) + len(self.pipeline_types) + 2

    @property
    def iso_feature_index(self) -> int:
        return self.n_features - 2

    def layout(self) -> dict:
        return {
            "sensor_one_hot": list(self.sensor_types),
            "pipeline_one_hot": list(self.pipeline_types),
            "scalars": ["iso_n", "exp_n"],
            "iso_norm": f"clamp(log2(iso/{self.iso_base})/{self.iso_stops}, 0, 1)",
            "exp_norm": f"clamp((log2(t)+{self.exp_floor_stops})/{self.exp_floor_stops}, 0, 1)",
        }


def encode_metadata(meta: CaptureMetadata, registry: MetadataRegistry | None = None) -> np.ndarray:
    """One-hot categories + normalized scalars in the registry's layout."""
    registry = registry or MetadataRegistry()
    if meta.sensor_type not in registry.sensor_types:
        raise UnknownCategoryError(f"unknown sensor type: {meta.sensor_type!r}")
    if meta.pipeline_type not in registry.pipeline_types:
        raise UnknownCategoryError(f"unknown pipeline type: {meta.pipeline_type!r}")
    vec = np.zeros(registry.n_features, dtype=np.float64)
    vec[registry.sensor_types.index(meta.sensor_type)] = 1.0
    off = len(registry.sensor_types)
    vec[off + registry.pipeline_types.index(meta.pipeline_type)] = 1.0
    iso_n = np.clip(np.log2(meta.iso / registry.iso_base) / registry.iso_stops, 0.0, 1.0)
    exp_n = np.clip(
        (np.log2(meta.exposure_time) + registry.exp_floor_stops) / registry.exp_floor_stops,
        0.0, 1.0,
    )
    vec[-2] = iso_n
    vec[-1] = exp_n
    return vec


# ---------------------------------------------------------------------------
# fusion algebra
# ---------------------------------------------------------------------------

def _strength_plane(prof: TuningProfile, shape: tuple) -> np.ndarray | float:
    s = prof.strength
    if isinstance(s, np.ndarray):
        if s.shape != shape:
            raise ShapeMismatchError(
                f"strength map {s.shape} does not match planes {shape}"
            )
        return s.astype(np.float64)
    return float(s)


def modulate(maps: ToneMaps, pair: ExposurePair, prof: TuningProfile) -> tuple:
    """(w~, s0~, s1~, G~): LUT-modulated weights/exposures and blended gain."""
    if maps.shape != pair.shape:
        raise ShapeMismatchError(f"maps {maps.shape} vs pair {pair.shape}")
    s = _strength_plane(prof, maps.shape)
    w_mod = prof.lut_weight(maps.w_y.astype(np.float64))
    s0_mod = prof.lut_exp0(pair.s0_y.astype(np.float64))
    s1_mod = prof.lut_exp1(pair.s1_y.astype(np.float64))
    g_mod = (1.0 - s) + s * maps.g.astype(np.float64)
    return w_mod, s0_mod, s1_mod, g_mod


def fuse_tone_ycc(pair: ExposurePair, maps: ToneMaps, prof: TuningProfile) -> tuple:
    """Raw YCbCr fusion: (i_y, i_c, it_y, it_c), no clamping or conversion."""
    w_mod, s0_mod, s1_mod, g_mod = modulate(maps, pair, prof)
    i_y = w_mod * s0_mod + (1.0 - w_mod) * s1_mod
    i_c = (
        maps.w_c0.astype(np.float64)[:, :, None] * pair.s0_c.astype(np.float64)
        + maps.w_c1.astype(np.float64)[:, :, None] * pair.s1_c.astype(np.float64)
    )
    it_y = i_y * g_mod
    it_c = i_c
    return i_y, i_c, it_y, it_c


def _ycc_to_display(y: np.ndarray, c: np.ndarray) -> ImageBuffer:
    ycc = np.concatenate([y[:, :, None], c], axis=2)
    rgb = np.clip(ycbcr_to_rgb_array(ycc), 0.0, 1.0)
    return ImageBuffer(rgb.astype(np.float32), ColorSpace.SRGB)


def fuse_tone(pair: ExposurePair, maps: ToneMaps, prof: TuningProfile | None = None) -> tuple:
    """(I, I~): fused SDR image and its contrast-enhanced variant, in RGB."""
    prof = prof or default_profile()
    i_y, i_c, it_y, it_c = fuse_tone_ycc(pair, maps, prof)
    return _ycc_to_display(i_y, i_c), _ycc_to_display(it_y, it_c)


# ---------------------------------------------------------------------------
# map providers
# ---------------------------------------------------------------------------

def solve_oracle_maps(pair: ExposurePair, y0: ImageBuffer, y1: ImageBuffer,
                      g_bounds: tuple = DEFAULT_G_BOUNDS,
                      eps: float = DEGENERATE_EPS) -> ToneMaps:
    """Invert the fusion algebra against the dual reference targets.

    Luma weight: W = (y0_Y - S1)/(S0 - S1) clamped to [0,1]; pixels where
    the exposures agree (|S0 - S1| < eps) take the midpoint 0.5. Chroma
    weights solve the per-pixel 2x2 system on (Cb, Cr) jointly; on the
    (common) degenerate manifold where the two chroma vectors are
    colinear, the equal-weight least-squares solution is used, which
    reproduces colinear targets exactly. The gain map divides the
    enhanced target by the re-rendered fused luma.
    """
    if y0.shape != y1.shape or y0.shape[:2] != pair.shape:
        raise ShapeMismatchError("targets and pair disagree in shape")
    y0_ycc = rgb_to_ycbcr_array(y0.astype64())
    y1_ycc = rgb_to_ycbcr_array(y1.astype64())
    s0 = pair.s0_y.astype(np.float64)
    s1 = pair.s1_y.astype(np.float64)

    denom = s0 - s1
    degenerate = np.abs(denom) < eps
    w_y = np.where(
        degenerate, 0.5,
        np.clip((y0_ycc[:, :, 0] - s1) / np.where(degenerate, 1.0, denom), 0.0, 1.0),
    )

    a = pair.s0_c.astype(np.float64)
    b = pair.s1_c.astype(np.float64)
    target = y0_ycc[:, :, 1:3]
    det = a[:, :, 0] * b[:, :, 1] - a[:, :, 1] * b[:, :, 0]
    norm_a = np.sqrt((a ** 2).sum(axis=2))
    norm_b = np.sqrt((b ** 2).sum(axis=2))
    well = np.abs(det) > 1e-3 * norm_a * norm_b + 1e-12
    safe_det = np.where(well, det, 1.0)
    w0_exact = (target[:, :, 0] * b[:, :, 1] - target[:, :, 1] * b[:, :, 0]) / safe_det
    w1_exact = (a[:, :, 0] * target[:, :, 1] - a[:, :, 1] * target[:, :, 0]) / safe_det
    s_vec = a + b
    ss = (s_vec ** 2).sum(axis=2)
    t = np.where(ss > 1e-12, (target * s_vec).sum(axis=2) / np.maximum(ss, 1e-12), 0.5)
    w_c0 = np.clip(np.where(well, w0_exact, t), 0.0, 1.0)
    w_c1 = np.clip(np.where(well, w1_exact, t), 0.0, 1.0)

    i_y = w_y * s0 + (1.0 - w_y) * s1
    g = np.clip(y1_ycc[:, :, 0] / np.maximum(i_y, eps), g_bounds[0], g_bounds[1])
    return ToneMaps(w_y, w_c0, w_c1, g, g_bounds, provider="oracle")


@dataclass(frozen=True)
class HeuristicConfig:
    """Noise-aware analytic map provider settings."""

    k_noise: float = 1.0
    detail_sigma: float = 2.0
    detail_amp: float = 1.5
    g_bounds: tuple = DEFAULT_G_BOUNDS


def heuristic_maps(pair: ExposurePair, ctx: GlobalContext, meta_vec: np.ndarray,
                   cfg: HeuristicConfig | None = None,
                   registry: MetadataRegistry | None = None) -> ToneMaps:
    """Analytic stand-in for the learned map predictor.

    Luma weight keys on the mean exposure luma (dark pixels lean on the
    bright exposure); the gain map is an unsharp-mask detail boost whose
    amplitude is attenuated by (1 - iso_n * k_noise): noisy captures get
    proportionally less contrast enhancement. Must be computed on the
    full frame (or a full-frame thumbnail) so tiled rendering stays
    consistent.
    """
    cfg = cfg or HeuristicConfig()
    registry = registry or MetadataRegistry()
    meta_vec = np.asarray(meta_vec, dtype=np.float64)
    if meta_vec.shape != (registry.n_features,):
        raise ShapeMismatchError(
            f"metadata vector has {meta_vec.shape}, registry expects {registry.n_features}"
        )
    iso_n = float(meta_vec[registry.iso_feature_index])

    m = 0.5 * (pair.s0_y.astype(np.float64) + pair.s1_y.astype(np.float64))
    m = np.clip(m, 0.0, 1.0)
    w_y = m * m * (3.0 - 2.0 * m)

    amp = cfg.detail_amp * max(0.0, 1.0 - iso_n * cfg.k_noise)
    detail = m - ndimage.gaussian_filter(m, cfg.detail_sigma, mode="nearest")
    g = np.clip(1.0 + amp * detail, cfg.g_bounds[0], cfg.g_bounds[1])

    chroma_w = np.clip(w_y, 0.0, 1.0)
    return ToneMaps(w_y, chroma_w, 1.0 - chroma_w, g, cfg.g_bounds, provider="heuristic")


# ---------------------------------------------------------------------------
# .tmaps container
# ---------------------------------------------------------------------------

def write_tmaps(maps: ToneMaps, path) -> None:
    h, w = maps.shape
    with open(Path(path), "wb") as f:
        f.write(TMAPS_MAGIC + struct.pack("<II", w, h))
        for plane in (maps.w_y, maps.w_c0, maps.w_c1, maps.g):
            f.write(np.ascontiguousarray(plane, dtype="<f4").tobytes())


def read_tmaps(path, g_bounds: tuple = DEFAULT_G_BOUNDS) -> ToneMaps:
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:4] != TMAPS_MAGIC:
        raise ValueError(f"{path}: not a TMP1 container")
    w, h = struct.unpack("<II", blob[4:12])
    n = w * h
    if len(blob) != 12 + 4 * n * 4:
        raise ValueError(f"{path}: payload size mismatch")
    planes = np.frombuffer(blob, dtype="<f4", offset=12).reshape(4, h, w)
    return ToneMaps(planes[0], planes[1], planes[2], planes[3],
                    g_bounds, provider="file")


# ---------------------------------------------------------------------------
# profile (de)serialization
# ---------------------------------------------------------------------------

def _lut_to_list(lut: Lut1D) -> list:
    return [[float(x), float(y)] for x, y in lut.points]


def profile_to_dict(prof: TuningProfile) -> dict:
    d = {
        "lut_weight": _lut_to_list(prof.lut_weight),
        "lut_exp0": _lut_to_list(prof.lut_exp0),
        "lut_exp1": _lut_to_list(prof.lut_exp1),
    }
    if isinstance(prof.strength, np.ndarray):
        d["strength_map"] = [[float(v) for v in row] for row in prof.strength]
    else:
        d["strength"] = float(prof.strength)
    return d


def profile_from_dict(d: dict, base: TuningProfile | None = None) -> TuningProfile:
    """Build a profile from a (possibly partial) dict over `base`."""
    base = base or default_profile()
    luts = {}
    for key in ("lut_weight", "lut_exp0", "lut_exp1"):
        if key in d and d[key] is not None:
            luts[key] = Lut1D(tuple((p[0], p[1]) for p in d[key]))
        else:
            luts[key] = getattr(base, key)
    if "strength_map" in d and d["strength_map"] is not None:
        strength = np.asarray(d["strength_map"], dtype=np.float32)
    elif "strength" in d and d["strength"] is not None:
        strength = float(d["strength"])
    else:
        strength = base.strength
    return TuningProfile(strength=strength, **luts)
