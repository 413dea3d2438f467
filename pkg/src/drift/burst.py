"""Handheld-burst synthesis from clean frames.

The generator takes a clean linear RGB frame and produces a burst of
noisy RGGB mosaics: the reference frame plus warped non-reference frames
driven by a pool of temporally-correlated handshake homographies. Noise
is heteroscedastic Gaussian, variance k_s * signal + sigma_r^2. Pools are
whole groups of 10 homographies sampled together, never interleaved.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .buffers import ColorSpace, ImageBuffer, InvalidImageError
from .homography import Homography
from .resample import bilinear_sample, resize_bilinear

GROUP_SIZE = 10


@dataclass(frozen=True)
class HandshakePool:
    """Groups of GROUP_SIZE homographies, one group per source capture."""

    groups: tuple

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        for i, g in enumerate(groups):
            if len(g) != GROUP_SIZE:
                raise ValueError(f"group {i} has {len(g)} entries, expected {GROUP_SIZE}")
            for h in g:
                if not isinstance(h, Homography):
                    raise TypeError("pool entries must be Homography instances")
        object.__setattr__(self, "groups", groups)

    def __len__(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class BurstSpec:
    """Burst shape and sensor-noise parameters.

    Noise model: variance = noise_shot * signal + noise_read^2 on linear
    samples. downscale_factor 4 models the super-resolution task inputs.
    """

    n_frames: int = 11
    noise_read: float = 0.0
    noise_shot: float = 0.0
    downscale_factor: int = 1

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("burst needs at least 1 frame")
        if not np.isfinite(self.noise_read) or self.noise_read < 0:
            raise ValueError("noise_read must be finite and >= 0")
        if not np.isfinite(self.noise_shot) or self.noise_shot < 0:
            raise ValueError("noise_shot must be finite and >= 0")
        if self.downscale_factor not in (1, 4):
            raise ValueError("downscale_factor must be 1 or 4")


def sample_handshake_group(pool: HandshakePool, rng_seed: int) -> tuple:
    """Draw one whole group uniformly; deterministic for a fixed seed."""
    if len(pool) == 0:
        raise ValueError("handshake pool is empty")
    rng = np.random.default_rng(rng_seed)
    idx = int(rng.integers(0, len(pool)))
    return pool.groups[idx]


def warp(img: ImageBuffer, h: Homography) -> ImageBuffer:
    """Apply a homography by inverse mapping with bilinear sampling.

    Out-of-bounds reads clamp to the nearest border sample. The identity
    transform returns the image bit-for-bit.
    """
    if h.is_identity():
        return img
    hinv = h.inverse().m
    ys, xs = np.mgrid[0.0:img.height, 0.0:img.width]
    denom = hinv[2, 0] * xs + hinv[2, 1] * ys + hinv[2, 2]
    sx = (hinv[0, 0] * xs + hinv[0, 1] * ys + hinv[0, 2]) / denom
    sy = (hinv[1, 0] * xs + hinv[1, 1] * ys + hinv[1, 2]) / denom
    out = bilinear_sample(img.data, sx, sy)
    return img.with_data(out.astype(np.float32))


def mosaic_rggb(img: ImageBuffer) -> ImageBuffer:
    """Sample a 3-channel linear image onto an RGGB Bayer mosaic."""
    if img.channels != 3:
        raise InvalidImageError("mosaic needs a 3-channel image")
    if img.height % 2 or img.width % 2:
        raise InvalidImageError("mosaic needs even dimensions")
    d = img.data
    out = np.empty((img.height, img.width), dtype=np.float32)
    out[0::2, 0::2] = d[0::2, 0::2, 0]
    out[0::2, 1::2] = d[0::2, 1::2, 1]
    out[1::2, 0::2] = d[1::2, 0::2, 1]
    out[1::2, 1::2] = d[1::2, 1::2, 2]
    return ImageBuffer(out, ColorSpace.BAYER)


_DEMOSAIC_KERNEL = np.array(
    [[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]]
)


def demosaic_bilinear(mosaic: ImageBuffer) -> ImageBuffer:
    """Bilinear RGGB demosaic (mask-normalized interpolation)."""
    if mosaic.colorspace != ColorSpace.BAYER:
        raise InvalidImageError("demosaic expects a Bayer mosaic")
    h, w = mosaic.shape
    d = mosaic.astype64()
    planes = []
    masks = {
        0: np.zeros((h, w)),
        1: np.zeros((h, w)),
        2: np.zeros((h, w)),
    }
    masks[0][0::2, 0::2] = 1.0
    masks[1][0::2, 1::2] = 1.0
    masks[1][1::2, 0::2] = 1.0
    masks[2][1::2, 1::2] = 1.0
    for c in range(3):
        num = ndimage.convolve(d * masks[c], _DEMOSAIC_KERNEL, mode="mirror")
        den = ndimage.convolve(masks[c], _DEMOSAIC_KERNEL, mode="mirror")
        planes.append(num / den)
    rgb = np.stack(planes, axis=2)
    return ImageBuffer(rgb.astype(np.float32), ColorSpace.LINEAR_RGB)


def add_sensor_noise(data: np.ndarray, noise_read: float, noise_shot: float,
                     rng: np.random.Generator) -> np.ndarray:
    """Heteroscedastic Gaussian noise; samples left unclamped so the
    variance contract holds exactly at low signal."""
    var = noise_shot * np.maximum(data, 0.0) + noise_read ** 2
    return data + rng.standard_normal(data.shape) * np.sqrt(var)


def synthesize_burst(gt: ImageBuffer, group, spec: BurstSpec, rng_seed: int) -> list:
    """Noisy Bayer burst: frame 0 from gt as-is, the rest warped by the group.

    The optional 4x downscale (super-resolution inputs) happens after
    warping and before noise + mosaicking.
    """
    if gt.channels != 3:
        raise InvalidImageError("ground truth must be 3-channel linear RGB")
    if gt.height % 2 or gt.width % 2:
        raise InvalidImageError("ground truth needs even dimensions")
    group = tuple(group)
    if len(group) != spec.n_frames - 1:
        raise InvalidImageError(
            f"group has {len(group)} homographies, burst needs {spec.n_frames - 1}"
        )
    if spec.downscale_factor == 4:
        if gt.width % 8 or gt.height % 8:
            raise InvalidImageError("4x downscale needs dimensions divisible by 8")
        target = (gt.width // 4, gt.height // 4)
    else:
        target = None

    rng = np.random.default_rng(rng_seed)
    frames = []
    for i in range(spec.n_frames):
        img = gt if i == 0 else warp(gt, group[i - 1])
        if target is not None:
            img = resize_bilinear(img, target[0], target[1])
        noisy = add_sensor_noise(img.astype64(), spec.noise_read, spec.noise_shot, rng)
        frames.append(mosaic_rggb(ImageBuffer(noisy.astype(np.float32))))
    return frames


# ---------------------------------------------------------------------------
# handshake pool synthesis and file format
# ---------------------------------------------------------------------------

def generate_handshake_pool(
    n_groups: int,
    width: int,
    height: int,
    max_translation_px: float = 8.0,
    max_rotation_deg: float = 0.5,
    seed: int = 0,
) -> HandshakePool:
    """Synthetic pool: smooth random-walk rotations/translations about the
    frame center, bounded by the given amplitudes."""
    rng = np.random.default_rng(seed)
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    center = np.array([[1, 0, cx], [0, 1, cy], [0, 0, 1]], dtype=np.float64)
    uncenter = np.array([[1, 0, -cx], [0, 1, -cy], [0, 0, 1]], dtype=np.float64)
    groups = []
    step_t = max_translation_px / np.sqrt(GROUP_SIZE) / 2.0
    step_r = np.deg2rad(max_rotation_deg) / np.sqrt(GROUP_SIZE) / 2.0
    for _ in range(n_groups):
        tx = ty = theta = 0.0
        seq = []
        for _ in range(GROUP_SIZE):
            tx = float(np.clip(tx + rng.normal(0, step_t), -max_translation_px, max_translation_px))
            ty = float(np.clip(ty + rng.normal(0, step_t), -max_translation_px, max_translation_px))
            theta = float(np.clip(theta + rng.normal(0, step_r),
                                  -np.deg2rad(max_rotation_deg), np.deg2rad(max_rotation_deg)))
            c, s = np.cos(theta), np.sin(theta)
            rot = np.array([[c, -s, tx], [s, c, ty], [0, 0, 1]], dtype=np.float64)
            seq.append(Homography(center @ rot @ uncenter))
        groups.append(tuple(seq))
    return HandshakePool(tuple(groups))


def write_pool(pool: HandshakePool, path) -> None:
    """Plain-text pool: `group <id>` then 10 rows of 9 floats (row-major)."""
    lines = []
    for gid, group in enumerate(pool.groups):
        lines.append(f"group {gid}")
        for h in group:
            lines.append(" ".join(repr(float(v)) for v in h.m.ravel()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_pool(path) -> HandshakePool:
    path = Path(path)
    groups = []
    current = None
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("group"):
            if current is not None:
                groups.append(tuple(current))
            current = []
            continue
        if current is None:
            raise ValueError(f"{path}:{lineno}: matrix row before any group header")
        vals = [float(v) for v in line.split()]
        if len(vals) != 9:
            raise ValueError(f"{path}:{lineno}: expected 9 values, got {len(vals)}")
        current.append(Homography(np.array(vals).reshape(3, 3)))
    if current is not None:
        groups.append(tuple(current))
    return HandshakePool(tuple(groups))


# ---------------------------------------------------------------------------
# corner-patch matching for alignment
# ---------------------------------------------------------------------------

def detect_corners(plane: np.ndarray, max_corners: int = 48,
                   min_distance: int | None = None,
                   border: int | None = None) -> np.ndarray:
    """Harris corners on a single plane; returns (N, 2) x,y coordinates.

    Spacing and border margins scale with the frame when not given, so
    small crops still yield usable corner sets.
    """
    p = plane.astype(np.float64)
    short_edge = min(p.shape)
    if min_distance is None:
        min_distance = int(np.clip(short_edge // 10, 4, 16))
    if border is None:
        border = int(np.clip(short_edge // 8, 4, 32))
    ix = ndimage.sobel(p, axis=1, mode="nearest")
    iy = ndimage.sobel(p, axis=0, mode="nearest")
    sxx = ndimage.gaussian_filter(ix * ix, 1.5)
    syy = ndimage.gaussian_filter(iy * iy, 1.5)
    sxy = ndimage.gaussian_filter(ix * iy, 1.5)
    resp = sxx * syy - sxy ** 2 - 0.06 * (sxx + syy) ** 2
    local_max = ndimage.maximum_filter(resp, size=min_distance) == resp
    resp = np.where(local_max, resp, -np.inf)
    resp[:border, :] = -np.inf
    resp[-border:, :] = -np.inf
    resp[:, :border] = -np.inf
    resp[:, -border:] = -np.inf
    flat = np.argsort(resp, axis=None)[::-1][:max_corners]
    ys, xs = np.unravel_index(flat, resp.shape)
    keep = np.isfinite(resp[ys, xs]) & (resp[ys, xs] > 0)
    return np.stack([xs[keep], ys[keep]], axis=1).astype(np.float64)


def match_patches(ref: np.ndarray, aux: np.ndarray, corners: np.ndarray,
                  patch: int = 11, search: int = 24):
    """SSD patch matching with parabolic sub-pixel refinement.

    Returns (src, dst): positions in `aux` matching `corners` in `ref`.
    """
    half = patch // 2
    h, w = ref.shape
    src, dst = [], []
    for x, y in corners.astype(int):
        if not (half + search <= x < w - half - search
                and half + search <= y < h - half - search):
            continue
        tpl = ref[y - half:y + half + 1, x - half:x + half + 1]
        win = aux[y - half - search:y + half + search + 1,
                  x - half - search:x + half + search + 1]
        views = np.lib.stride_tricks.sliding_window_view(win, (patch, patch))
        ssd = ((views - tpl) ** 2).sum(axis=(2, 3))
        dy, dx = np.unravel_index(np.argmin(ssd), ssd.shape)
        # parabolic refinement on the SSD surface, one axis at a time
        fx = fy = 0.0
        if 0 < dx < ssd.shape[1] - 1:
            l, c, r = ssd[dy, dx - 1], ssd[dy, dx], ssd[dy, dx + 1]
            den = l - 2 * c + r
            if den > 1e-12:
                fx = float(np.clip(0.5 * (l - r) / den, -0.5, 0.5))
        if 0 < dy < ssd.shape[0] - 1:
            u, c, d = ssd[dy - 1, dx], ssd[dy, dx], ssd[dy + 1, dx]
            den = u - 2 * c + d
            if den > 1e-12:
                fy = float(np.clip(0.5 * (u - d) / den, -0.5, 0.5))
        dst.append((float(x), float(y)))
        src.append((x - search + dx + fx, y - search + dy + fy))
    return np.array(src, dtype=np.float64), np.array(dst, dtype=np.float64)
