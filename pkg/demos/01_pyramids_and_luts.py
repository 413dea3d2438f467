"""Building blocks: Laplacian pyramids and tone-curve LUTs.

Builds a pyramid from a test image, shows that reconstruction is exact,
then sweeps a plane through a few LUT shapes. Outputs land in demos/out/.
"""

from pathlib import Path

import numpy as np

from drift import ImageBuffer, Lut1D, apply_lut, build_laplacian, reconstruct
from drift.buffers import ColorSpace
from drift.io import write_png8

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(0)
yy, xx = np.mgrid[0:256, 0:256] / 256.0
scene = 0.5 + 0.3 * np.sin(8 * np.pi * xx) * np.cos(6 * np.pi * yy)
scene += 0.1 * rng.standard_normal((256, 256))
img = ImageBuffer(np.clip(scene, 0, 1).astype(np.float32), ColorSpace.LUMA)

pyr = build_laplacian(img, 5)
print("pyramid levels:", [lv.shape for lv in pyr.levels])
back = reconstruct(pyr)
print(f"reconstruction max error: {np.max(np.abs(back.data - img.data)):.2e}")

for i, level in enumerate(pyr.levels):
    viz = level.data if i == len(pyr.levels) - 1 else level.data * 4 + 0.5
    write_png8(ImageBuffer(np.clip(viz, 0, 1), ColorSpace.LUMA), OUT / f"pyr_band{i}.png")

luts = {
    "identity": Lut1D(((0, 0), (1, 1))),
    "lift_shadows": Lut1D(((0, 0.0), (0.25, 0.4), (1, 1))),
    "s_curve": Lut1D(((0, 0), (0.3, 0.2), (0.7, 0.8), (1, 1))),
}
for name, lut in luts.items():
    out = apply_lut(img, lut)
    write_png8(out, OUT / f"lut_{name}.png")
    print(f"{name:>14}: mean {img.data.mean():.3f} -> {out.data.mean():.3f}")
