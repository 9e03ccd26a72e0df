"""Grayscale image container, binary PGM codec, sampling, warping, metrics.

Conventions used throughout the package:

* pixel grids are row-major numpy arrays of shape ``(height, width)``,
  top row first; ``x`` is the column coordinate, ``y`` the row coordinate,
  and ``(0, 0)`` is the center of the top-left pixel;
* intensities are float64 and normalized to ``[0, 1]`` on load
  (``byte / 255``); arithmetic may push values outside that range and
  ``save_pgm`` clamps on the way out;
* sampling outside the grid clamps coordinates to the border
  (replicate extrapolation), so samples never invent intensities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .registration import DisplacementField

_HEADER_WHITESPACE = b" \t\n\r\x0b\x0c"


class PgmDecodeError(ValueError):
    """A PGM byte stream could not be decoded."""


@dataclass(frozen=True, eq=False)
class Image2D:
    """Immutable grayscale raster with one float intensity per pixel."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("image intensities must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width), matching the pixel array."""
        return self.pixels.shape


def require_same_shape(a: Image2D, b: Image2D) -> None:
    if a.shape != b.shape:
        raise ValueError(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def _next_header_token(data: bytes, pos: int, field: str) -> tuple[bytes, int]:
    """Return the next whitespace-delimited header token, skipping # comments."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c in _HEADER_WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < n and data[pos : pos + 1] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos : pos + 1] not in _HEADER_WHITESPACE:
        pos += 1
    if start == pos:
        raise PgmDecodeError(f"malformed header: missing {field}")
    return data[start:pos], pos


def _header_int(data: bytes, pos: int, field: str) -> tuple[int, int]:
    token, pos = _next_header_token(data, pos, field)
    try:
        value = int(token)
    except ValueError:
        raise PgmDecodeError(f"malformed header: non-numeric {field} {token!r}") from None
    return value, pos


def load_pgm(data: bytes) -> Image2D:
    """Decode a binary (P5) PGM byte stream into a normalized image.

    Only 8-bit files are accepted: a maxval above 255 is rejected rather
    than rescaled so that msd keeps unambiguous 8-bit semantics.  Pixel
    values are mapped to ``byte / 255``.
    """
    magic, pos = _next_header_token(bytes(data), 0, "magic")
    if magic != b"P5":
        raise PgmDecodeError(f"unsupported magic {magic!r} (expected b'P5')")
    width, pos = _header_int(data, pos, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width < 1:
        raise PgmDecodeError(f"invalid width {width}")
    if height < 1:
        raise PgmDecodeError(f"invalid height {height}")
    if maxval < 1:
        raise PgmDecodeError(f"invalid maxval {maxval}")
    if maxval > 255:
        raise PgmDecodeError(f"maxval {maxval} exceeds 255 (16-bit PGM not supported)")
    # single whitespace byte separates maxval from the raster
    if pos >= len(data) or data[pos : pos + 1] not in _HEADER_WHITESPACE:
        raise PgmDecodeError("malformed header: missing whitespace before pixel data")
    pos += 1
    expected = width * height
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise PgmDecodeError(
            f"pixel data truncated: expected {expected} bytes, got {len(payload)}"
        )
    raster = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return Image2D(raster.astype(np.float64) / 255.0)


def save_pgm(img: Image2D) -> bytes:
    """Encode an image as binary PGM (P5, maxval 255).

    Intensities are clamped to [0, 1] and quantized with half-away-from-zero
    rounding, so ``load_pgm(save_pgm(img))`` is exact for images whose values
    are multiples of 1/255 and within 1/510 otherwise.
    """
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    scaled = np.clip(img.pixels, 0.0, 1.0) * 255.0
    raster = np.floor(scaled + 0.5).astype(np.uint8)
    return header + raster.tobytes()


def _bilinear(pixels: np.ndarray, px, py):
    """Clamped bilinear interpolation of a pixel grid at real coordinates.

    Exact at integer coordinates; coordinates are clamped to the grid before
    interpolation (replicate-border extrapolation).
    """
    h, w = pixels.shape
    x = np.clip(px, 0.0, float(w - 1))
    y = np.clip(py, 0.0, float(h - 1))
    ix = np.minimum(x.astype(np.intp), max(w - 2, 0))
    iy = np.minimum(y.astype(np.intp), max(h - 2, 0))
    ix1 = np.minimum(ix + 1, w - 1)
    iy1 = np.minimum(iy + 1, h - 1)
    fx = x - ix
    fy = y - iy
    top = (1.0 - fx) * pixels[iy, ix] + fx * pixels[iy, ix1]
    bottom = (1.0 - fx) * pixels[iy1, ix] + fx * pixels[iy1, ix1]
    return (1.0 - fy) * top + fy * bottom


def _sample_terms(pixels: np.ndarray, px, py):
    """Bilinear value plus exact interpolant slopes at sample points.

    Returns ``(value, slope_x, slope_y)`` where the slopes are the partial
    derivatives of the clamped bilinear interpolant, zero wherever the
    respective coordinate is clamped (the interpolant is constant there).
    Sharing one index computation keeps the registration force loop cheap
    and guarantees value/derivative consistency.
    """
    h, w = pixels.shape
    x = np.clip(px, 0.0, float(w - 1))
    y = np.clip(py, 0.0, float(h - 1))
    ix = np.minimum(x.astype(np.intp), max(w - 2, 0))
    iy = np.minimum(y.astype(np.intp), max(h - 2, 0))
    ix1 = np.minimum(ix + 1, w - 1)
    iy1 = np.minimum(iy + 1, h - 1)
    fx = x - ix
    fy = y - iy
    v00 = pixels[iy, ix]
    v01 = pixels[iy, ix1]
    v10 = pixels[iy1, ix]
    v11 = pixels[iy1, ix1]
    top = (1.0 - fx) * v00 + fx * v01
    bottom = (1.0 - fx) * v10 + fx * v11
    value = (1.0 - fy) * top + fy * bottom
    inside_x = (px >= 0.0) & (px <= w - 1.0) if w > 1 else np.zeros_like(x, dtype=bool)
    inside_y = (py >= 0.0) & (py <= h - 1.0) if h > 1 else np.zeros_like(y, dtype=bool)
    slope_x = np.where(inside_x, (1.0 - fy) * (v01 - v00) + fy * (v11 - v10), 0.0)
    slope_y = np.where(inside_y, (1.0 - fx) * (v10 - v00) + fx * (v11 - v01), 0.0)
    return value, slope_x, slope_y


def sample_bilinear(img: Image2D, x, y):
    """Sample an image at real pixel coordinates, clamping to the border.

    Accepts scalars or broadcastable arrays; returns a float for scalar
    input.  Non-finite coordinates are rejected.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if not (np.isfinite(xa).all() and np.isfinite(ya).all()):
        raise ValueError("sample coordinates must be finite")
    out = _bilinear(img.pixels, xa, ya)
    if np.isscalar(x) and np.isscalar(y):
        return float(out)
    return out


def gradient(img: Image2D) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference intensity gradient grids, unit pixel spacing.

    Returns ``(gx, gy)`` with central differences at interior pixels and
    one-sided differences on the borders.
    """
    if img.width < 2 or img.height < 2:
        raise ValueError(
            f"gradient needs at least 2x2 pixels, got {img.width}x{img.height}"
        )
    gy, gx = np.gradient(img.pixels)
    return gx, gy


def warp(img: Image2D, field: "DisplacementField", scale: float) -> Image2D:
    """Backward-warp an image along a displacement field.

    ``out(x) = img(x + scale * u(x))`` with clamped bilinear sampling, so a
    zero field or zero scale reproduces the input bit for bit.
    """
    if field.u1.shape != img.shape:
        raise ValueError(
            f"dimension mismatch: image {img.width}x{img.height} vs field "
            f"{field.u1.shape[1]}x{field.u1.shape[0]}"
        )
    xs, ys = grid_coordinates(img.width, img.height)
    return Image2D(_bilinear(img.pixels, xs + scale * field.u1, ys + scale * field.u2))


def grid_coordinates(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Float coordinate grids ``(xs, ys)`` of shape (height, width)."""
    return np.meshgrid(
        np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64)
    )


def ssd(a: Image2D, b: Image2D) -> float:
    """Half the sum of squared per-pixel differences."""
    require_same_shape(a, b)
    d = a.pixels - b.pixels
    return 0.5 * float(np.sum(d * d))


def msd(original: Image2D, interpolated: Image2D) -> float:
    """Mean squared difference on the 8-bit scale.

    Intensities are multiplied by 255 before differencing so values are
    comparable across tools that report on byte images.
    """
    require_same_shape(original, interpolated)
    d = 255.0 * original.pixels - 255.0 * interpolated.pixels
    return float(np.mean(d * d))
