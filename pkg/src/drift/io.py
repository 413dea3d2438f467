"""File formats: the `.lfr` linear-frame container and PNG/PGM bridges.

`.lfr` layout: magic "LFR1", then little-endian u32 width, height,
channels, colorspace code, then float32 samples in planar order (all of
channel 0, then channel 1, ...). Round-trips are bit-exact.

PNG/PGM I/O goes through OpenCV: 16-bit import for Bayer/SDR sources,
8-bit export for display-referred results.
"""

from __future__ import annotations

import struct
from pathlib import Path

import cv2
import numpy as np

from .buffers import ColorSpace, ImageBuffer, InvalidImageError

LFR_MAGIC = b"LFR1"


class FileFormatError(ValueError):
    """Raised for unreadable or inconsistent container files."""


def write_lfr(img: ImageBuffer, path) -> None:
    path = Path(path)
    header = LFR_MAGIC + struct.pack(
        "<IIII", img.width, img.height, img.channels, int(img.colorspace)
    )
    if img.channels == 1:
        planar = np.ascontiguousarray(img.data, dtype=np.float32)
    else:
        planar = np.ascontiguousarray(np.moveaxis(img.data, 2, 0), dtype=np.float32)
    with open(path, "wb") as f:
        f.write(header)
        f.write(planar.astype("<f4").tobytes())


def read_lfr(path) -> ImageBuffer:
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 20 or blob[:4] != LFR_MAGIC:
        raise FileFormatError(f"{path}: not an LFR1 file")
    w, h, c, cs = struct.unpack("<IIII", blob[4:20])
    expected = 20 + w * h * c * 4
    if len(blob) != expected:
        raise FileFormatError(
            f"{path}: payload is {len(blob) - 20} bytes, expected {expected - 20}"
        )
    try:
        colorspace = ColorSpace(cs)
    except ValueError as exc:
        raise FileFormatError(f"{path}: unknown colorspace code {cs}") from exc
    flat = np.frombuffer(blob, dtype="<f4", offset=20)
    if c == 1:
        data = flat.reshape(h, w)
    else:
        data = np.moveaxis(flat.reshape(c, h, w), 0, 2)
    return ImageBuffer(data, colorspace)


def _from_cv(raw: np.ndarray, colorspace: ColorSpace | None, origin: str) -> ImageBuffer:
    if raw is None:
        raise FileFormatError(f"{origin}: unreadable image")
    if raw.dtype == np.uint16:
        data = raw.astype(np.float32) / 65535.0
    elif raw.dtype == np.uint8:
        data = raw.astype(np.float32) / 255.0
    else:
        data = raw.astype(np.float32)
    if data.ndim == 3:
        if data.shape[2] == 4:
            data = data[:, :, :3]
        data = data[:, :, ::-1]  # BGR -> RGB
        cs = colorspace if colorspace is not None else ColorSpace.LINEAR_RGB
    else:
        cs = colorspace if colorspace is not None else ColorSpace.LUMA
    return ImageBuffer(data, cs)


def read_image(path, colorspace: ColorSpace | None = None) -> ImageBuffer:
    """Read .lfr, or 8/16-bit PNG/PGM scaled to [0, 1].

    PNG/PGM default to LINEAR_RGB (color) / LUMA (gray) unless a
    colorspace is given.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image: {path}")
    if path.suffix.lower() == ".lfr":
        return read_lfr(path)
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    return _from_cv(raw, colorspace, str(path))


def decode_image_bytes(blob: bytes, colorspace: ColorSpace | None = None) -> ImageBuffer:
    """Decode an uploaded image: .lfr by magic, else PNG/PGM via OpenCV."""
    if blob[:4] == LFR_MAGIC:
        w, h, c, cs = struct.unpack("<IIII", blob[4:20])
        expected = 20 + w * h * c * 4
        if len(blob) != expected:
            raise FileFormatError("LFR payload size mismatch")
        flat = np.frombuffer(blob, dtype="<f4", offset=20)
        data = flat.reshape(h, w) if c == 1 else np.moveaxis(flat.reshape(c, h, w), 0, 2)
        return ImageBuffer(data, ColorSpace(cs))
    raw = cv2.imdecode(np.frombuffer(blob, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
    return _from_cv(raw, colorspace, "upload")


def write_png8(img: ImageBuffer, path) -> None:
    """Export a display-referred buffer as 8-bit PNG (values clamped)."""
    path = Path(path)
    data = np.clip(img.data, 0.0, 1.0)
    u8 = np.round(data * 255.0).astype(np.uint8)
    if u8.ndim == 3:
        u8 = u8[:, :, ::-1]  # RGB -> BGR
    if not cv2.imwrite(str(path), u8):
        raise FileFormatError(f"{path}: PNG write failed")


def write_png16(img: ImageBuffer, path) -> None:
    """Export as 16-bit PNG (values clamped to [0, 1])."""
    path = Path(path)
    data = np.clip(img.data, 0.0, 1.0)
    u16 = np.round(data * 65535.0).astype(np.uint16)
    if u16.ndim == 3:
        u16 = u16[:, :, ::-1]
    if not cv2.imwrite(str(path), u16):
        raise FileFormatError(f"{path}: PNG write failed")


def encode_png8_bytes(img: ImageBuffer) -> bytes:
    """In-memory 8-bit PNG encoding (service previews)."""
    data = np.clip(img.data, 0.0, 1.0)
    u8 = np.round(data * 255.0).astype(np.uint8)
    if u8.ndim == 3:
        u8 = u8[:, :, ::-1]
    ok, buf = cv2.imencode(".png", u8)
    if not ok:
        raise FileFormatError("PNG encoding failed")
    return buf.tobytes()
