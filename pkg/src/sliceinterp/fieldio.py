"""Binary codecs for displacement fields (DF2) and raw scalar grids (RF32).

DF2 carries a dense two-component displacement field::

    DF2\\n<width> <height>\\n

followed by ``width * height`` records of two IEEE-754 32-bit little-endian
floats (u1 then u2), row-major with the top row first.  RF32 is the
single-channel analogue used for loss-free export of interpolated slices::

    RF32\\n<width> <height>\\n

followed by ``width * height`` 32-bit little-endian floats.  Both formats
round-trip bit-exactly.
"""

from __future__ import annotations

import numpy as np

from .image import Image2D
from .registration import DisplacementField


class GridFormatError(ValueError):
    """A DF2 or RF32 byte stream could not be decoded."""


def _parse_header(data: bytes, magic: bytes) -> tuple[int, int, int]:
    """Return (width, height, payload offset) after validating the header."""
    if not data.startswith(magic + b"\n"):
        raise GridFormatError(f"bad magic: expected {magic!r}")
    end = data.find(b"\n", len(magic) + 1)
    if end < 0:
        raise GridFormatError("malformed header: missing dimension line")
    parts = data[len(magic) + 1 : end].split()
    if len(parts) != 2:
        raise GridFormatError("malformed header: expected '<width> <height>'")
    try:
        width, height = int(parts[0]), int(parts[1])
    except ValueError:
        raise GridFormatError(f"malformed header: non-numeric dimensions {parts}") from None
    if width < 1 or height < 1:
        raise GridFormatError(f"invalid dimensions {width}x{height}")
    return width, height, end + 1


def _read_payload(data: bytes, offset: int, count: int) -> np.ndarray:
    payload = data[offset : offset + 4 * count]
    if len(payload) < 4 * count:
        raise GridFormatError(
            f"payload truncated: expected {4 * count} bytes, got {len(payload)}"
        )
    values = np.frombuffer(payload, dtype="<f4", count=count)
    if not np.isfinite(values).all():
        raise GridFormatError("payload contains non-finite values")
    return values


def save_df2(field: DisplacementField) -> bytes:
    """Encode a displacement field; values are stored as float32."""
    h, w = field.u1.shape
    interleaved = np.empty((h, w, 2), dtype="<f4")
    interleaved[:, :, 0] = field.u1
    interleaved[:, :, 1] = field.u2
    return f"DF2\n{w} {h}\n".encode("ascii") + interleaved.tobytes()


def load_df2(data: bytes) -> DisplacementField:
    """Decode a DF2 byte stream."""
    width, height, offset = _parse_header(data, b"DF2")
    flat = _read_payload(data, offset, 2 * width * height)
    pairs = flat.reshape(height, width, 2)
    return DisplacementField(
        pairs[:, :, 0].astype(np.float64), pairs[:, :, 1].astype(np.float64)
    )


def save_rf32(img: Image2D) -> bytes:
    """Encode an image as a raw float32 grid (no quantization)."""
    return (
        f"RF32\n{img.width} {img.height}\n".encode("ascii")
        + img.pixels.astype("<f4").tobytes()
    )


def load_rf32(data: bytes) -> Image2D:
    """Decode an RF32 byte stream."""
    width, height, offset = _parse_header(data, b"RF32")
    flat = _read_payload(data, offset, width * height)
    return Image2D(flat.reshape(height, width).astype(np.float64))
