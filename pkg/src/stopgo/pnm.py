"""Binary PGM (P5) / PPM (P6) readers and writers, plus a minimal grayscale PNG encoder."""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np


class PnmError(ValueError):
    """Malformed or unsupported PNM file."""


def _read_header(data: bytes) -> tuple[bytes, int, int, int, int]:
    """Parse magic, width, height, maxval; return them plus the pixel-data offset.

    Whitespace and '#' comments between header tokens follow the netpbm rules.
    """
    if len(data) < 2 or data[:1] != b"P":
        raise PnmError("not a PNM file")
    magic = data[:2]
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise PnmError("truncated header")
        try:
            tokens.append(int(data[start:pos]))
        except ValueError:
            raise PnmError(f"bad header token {data[start:pos]!r}") from None
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = tokens
    if width <= 0 or height <= 0:
        raise PnmError("non-positive dimensions")
    if maxval != 255:
        raise PnmError(f"unsupported maxval {maxval} (only 255)")
    return magic, width, height, maxval, pos


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary PGM (P5) into a (height, width) uint8 array."""
    data = Path(path).read_bytes()
    magic, width, height, _, pos = _read_header(data)
    if magic != b"P5":
        raise PnmError(f"expected P5 magic, got {magic!r}")
    need = width * height
    pixels = data[pos : pos + need]
    if len(pixels) != need:
        raise PnmError("truncated pixel data")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)


def read_ppm(path: str | Path) -> np.ndarray:
    """Read a binary PPM (P6) into a (height, width, 3) uint8 array."""
    data = Path(path).read_bytes()
    magic, width, height, _, pos = _read_header(data)
    if magic != b"P6":
        raise PnmError(f"expected P6 magic, got {magic!r}")
    need = width * height * 3
    pixels = data[pos : pos + need]
    if len(pixels) != need:
        raise PnmError("truncated pixel data")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3)


def read_image(path: str | Path) -> np.ndarray:
    """Read either PGM or PPM by magic number; grayscale comes back 2-D, color 3-D."""
    head = Path(path).read_bytes()[:2]
    if head == b"P5":
        return read_pgm(path)
    if head == b"P6":
        return read_ppm(path)
    raise PnmError(f"unsupported magic {head!r} in {path}")


def write_pgm(path: str | Path, plane: np.ndarray) -> None:
    plane = np.ascontiguousarray(plane, dtype=np.uint8)
    if plane.ndim != 2:
        raise PnmError("PGM wants a 2-D plane")
    h, w = plane.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + plane.tobytes())


def write_ppm(path: str | Path, image: np.ndarray) -> None:
    image = np.ascontiguousarray(image, dtype=np.uint8)
    if image.ndim != 3 or image.shape[2] != 3:
        raise PnmError("PPM wants a (h, w, 3) image")
    h, w, _ = image.shape
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + image.tobytes())


def encode_png_gray(plane: np.ndarray) -> bytes:
    """Encode a uint8 grayscale plane as an 8-bit PNG (for browser-viewable thumbnails)."""
    plane = np.ascontiguousarray(plane, dtype=np.uint8)
    if plane.ndim != 2:
        raise PnmError("PNG thumbnail wants a 2-D plane")
    h, w = plane.shape

    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
        )

    ihdr = struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0)  # 8-bit grayscale
    raw = b"".join(b"\x00" + plane[y].tobytes() for y in range(h))  # filter 0 per scanline
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(raw, 9))
        + chunk(b"IEND", b"")
    )
