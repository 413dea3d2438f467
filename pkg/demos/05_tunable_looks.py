"""Tunability: one render state, many looks, no recomputation.

The exposure pair and enhancement maps are computed once; each look is
just a different LUT/strength profile through the fusion algebra. This
is the interactive-tuning hot path.
"""

from pathlib import Path

import numpy as np
from scipy import ndimage

from drift import ImageBuffer, Lut1D, TuningProfile, compute_global_context, fuse_tone, tonemap_lite
from drift.enhance import CaptureMetadata, encode_metadata, heuristic_maps
from drift.io import write_png8

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(5)
base = ndimage.gaussian_filter(rng.random((192, 256)), 2.0)
base = (base - base.min()) / (base.max() - base.min())
lum = 0.03 * np.power(200.0, base)
tint = 1.0 + 0.25 * (ndimage.gaussian_filter(rng.random((192, 256, 3)), (5, 5, 0)) - 0.5)
hdr = ImageBuffer((lum[:, :, None] * tint).astype(np.float32))

ctx = compute_global_context(hdr)
pair = tonemap_lite(hdr, ctx)
meta = encode_metadata(CaptureMetadata("main", "denoise", iso=100, exposure_time=1 / 100))
maps = heuristic_maps(pair, ctx, meta)

looks = {
    "default": TuningProfile(),
    "no_contrast": TuningProfile(strength=0.0),
    "strong_contrast": TuningProfile(strength=1.0),
    "brighter": TuningProfile(lut_weight=Lut1D(((0, 0), (0.5, 0.3), (1, 1)))),
    "hdr_protect": TuningProfile(lut_weight=Lut1D(((0, 0.2), (0.6, 0.8), (1, 1)))),
    "lifted_blacks": TuningProfile(lut_exp1=Lut1D(((0, 0.08), (0.5, 0.55), (1, 1)))),
}

for name, profile in looks.items():
    _, enhanced = fuse_tone(pair, maps, profile)
    write_png8(enhanced, OUT / f"look_{name}.png")
    y = enhanced.data.mean()
    print(f"{name:>16}: mean luma {y:.3f}")
print("wrote look variants to demos/out/")
