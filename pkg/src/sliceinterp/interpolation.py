"""Slice synthesis from registration results, baselines, and test phantoms.

The in-between slice at ratio ``r`` (distance fraction from the first
slice) is built by half-warping both inputs along the estimated
correspondence and blending them with weights favoring the nearer
endpoint:

    out(x) = (1 - r) * R1(x - r*u(x)) + r * R2(x + (1-r)*u(x)).

``r = 0.5`` is the plain average of the two half-warped images.  The blend
is evaluated as ``a + r*(b - a)`` (mirrored above 0.5) so the endpoints and
the equal-input fixpoint are reproduced bit for bit.

Phantoms replace unavailable clinical slices in tests: simple shapes with
analytic coverage so the exact halfway pose can be rendered as ground
truth.  Motion is linear in the pose parameter (translation plus linear
size interpolation for the isotropic scale factor), matching the linear
trajectory assumption of the registration-based interpolant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import Image2D, grid_coordinates, require_same_shape, warp
from .registration import DisplacementField, RegistrationConfig, register_symmetric

PHANTOM_KINDS = ("disk", "rectangle", "gaussian_blob")

# gaussian blobs are cut off at 4 sigma (and rescaled to keep the center at
# exactly 1) so that far-field pixels are exactly zero
_BLOB_CUTOFF = np.exp(-8.0)


def _check_unit_ratio(ratio: float) -> float:
    ratio = float(ratio)
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must lie in [0, 1], got {ratio}")
    return ratio


def _mix(a: np.ndarray, b: np.ndarray, ratio: float) -> np.ndarray:
    """Per-pixel blend (1-ratio)*a + ratio*b, exact at endpoints and ties."""
    if ratio <= 0.5:
        return a + ratio * (b - a)
    return b + (1.0 - ratio) * (a - b)


def linear_interpolate(r1: Image2D, r2: Image2D, ratio: float) -> Image2D:
    """Intensity-only baseline: per-pixel weighted average of the inputs."""
    require_same_shape(r1, r2)
    ratio = _check_unit_ratio(ratio)
    return Image2D(_mix(r1.pixels, r2.pixels, ratio))


def interpolate_at_ratio(
    r1: Image2D, r2: Image2D, field: DisplacementField, ratio: float
) -> Image2D:
    """Synthesize the slice at distance fraction ``ratio`` from ``r1``.

    Ratio 0 and 1 return the respective endpoint bit-exactly, and a zero
    field degenerates to :func:`linear_interpolate` at the same ratio.
    """
    require_same_shape(r1, r2)
    ratio = _check_unit_ratio(ratio)
    a = warp(r1, field, -ratio)
    b = warp(r2, field, 1.0 - ratio)
    return Image2D(_mix(a.pixels, b.pixels, ratio))


def interpolate_midpoint(r1: Image2D, r2: Image2D, field: DisplacementField) -> Image2D:
    """Average of the two half-warped inputs (the ratio-0.5 slice)."""
    return interpolate_at_ratio(r1, r2, field, 0.5)


def interpolate_single_direction(
    reference: Image2D, template: Image2D, field: DisplacementField
) -> Image2D:
    """Midpoint synthesis from a single-direction (one-sided) field.

    The one-sided field maps the reference onto the template, so both
    images are half-warped along it and averaged, the same construction as
    the symmetric midpoint.  This convention is one defensible way to turn
    a one-sided field into a midpoint slice and is what the comparison
    tests use.
    """
    return interpolate_at_ratio(reference, template, field, 0.5)


def interpolate_stack(
    slices, per_gap: int, cfg: RegistrationConfig | None = None
) -> list[Image2D]:
    """Upsample an ordered slice sequence along its stacking axis.

    Each adjacent pair is registered once (symmetrically) and ``per_gap``
    slices are synthesized at ratios ``j / (per_gap + 1)``; originals and
    interpolants are interleaved in order, giving ``n + (n-1)*per_gap``
    slices.  ``per_gap = 0`` returns the input sequence unchanged.
    """
    slices = list(slices)
    if len(slices) < 2:
        raise ValueError(f"need at least two slices, got {len(slices)}")
    for s in slices[1:]:
        require_same_shape(slices[0], s)
    per_gap = int(per_gap)
    if per_gap < 0:
        raise ValueError(f"per_gap must be >= 0, got {per_gap}")
    if per_gap == 0:
        return slices
    out = [slices[0]]
    for a, b in zip(slices, slices[1:]):
        result = register_symmetric(a, b, cfg)
        for j in range(1, per_gap + 1):
            out.append(interpolate_at_ratio(a, b, result.field, j / (per_gap + 1)))
        out.append(b)
    return out


@dataclass(frozen=True)
class PhantomSpec:
    """Analytic test scene: one shape, two poses, linear motion between.

    ``center`` is the pose-0 shape center in (x, y) pixel coordinates;
    pose 1 is reached by ``translation`` and by scaling the shape size
    with ``scale``.  ``radius`` applies to disks, ``half_extent`` (hx, hy)
    to rectangles, ``sigma`` to gaussian blobs.  Edges ramp linearly from 1
    to 0 over ``edge_softness`` pixels (ignored by blobs, which are smooth
    already).  Both endpoint poses must fit inside the grid.
    """

    kind: str
    width: int
    height: int
    center: tuple[float, float]
    radius: float | None = None
    half_extent: tuple[float, float] | None = None
    sigma: float | None = None
    translation: tuple[float, float] = (0.0, 0.0)
    scale: float = 1.0
    edge_softness: float = 1.0

    def __post_init__(self):
        if self.kind not in PHANTOM_KINDS:
            raise ValueError(f"unknown phantom kind {self.kind!r}, expected one of {PHANTOM_KINDS}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must be non-empty, got {self.width}x{self.height}")
        if self.edge_softness < 0.0:
            raise ValueError(f"edge_softness must be >= 0, got {self.edge_softness}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.kind == "disk" and not (self.radius and self.radius > 0):
            raise ValueError("disk phantoms need a positive radius")
        if self.kind == "rectangle":
            if self.half_extent is None or min(self.half_extent) <= 0:
                raise ValueError("rectangle phantoms need positive half extents")
        if self.kind == "gaussian_blob" and not (self.sigma and self.sigma > 0):
            raise ValueError("gaussian blob phantoms need a positive sigma")
        for pose in (0.0, 1.0):
            self._check_fits(pose)

    def _pose(self, t: float):
        cx = self.center[0] + t * self.translation[0]
        cy = self.center[1] + t * self.translation[1]
        size = 1.0 + t * (self.scale - 1.0)
        return cx, cy, size

    def _support(self, t: float):
        """Half-widths of the rendered support box at pose ``t``."""
        cx, cy, size = self._pose(t)
        pad = self.edge_softness / 2.0
        if self.kind == "disk":
            ext = self.radius * size + pad
            return cx, cy, ext, ext
        if self.kind == "rectangle":
            hx, hy = self.half_extent
            return cx, cy, hx * size + pad, hy * size + pad
        ext = 4.0 * self.sigma * size
        return cx, cy, ext, ext

    def _check_fits(self, t: float):
        cx, cy, ex, ey = self._support(t)
        if cx - ex < 0 or cx + ex > self.width - 1 or cy - ey < 0 or cy + ey > self.height - 1:
            raise ValueError(
                f"shape exceeds the {self.width}x{self.height} grid at pose {t:g}"
            )


def _edge_ramp(margin: np.ndarray, softness: float) -> np.ndarray:
    """Coverage ramp: 1 at margin >= softness/2, 0 at margin <= -softness/2."""
    if softness == 0.0:
        return (margin >= 0.0).astype(np.float64)
    return np.clip(0.5 + margin / softness, 0.0, 1.0)


def render_phantom(spec: PhantomSpec, pose: float) -> Image2D:
    """Render the phantom at pose ``t`` in [0, 1] (0.5 = exact halfway)."""
    cx, cy, size = spec._pose(pose)
    xs, ys = grid_coordinates(spec.width, spec.height)
    if spec.kind == "disk":
        margin = spec.radius * size - np.hypot(xs - cx, ys - cy)
        values = _edge_ramp(margin, spec.edge_softness)
    elif spec.kind == "rectangle":
        hx, hy = spec.half_extent
        values = _edge_ramp(hx * size - np.abs(xs - cx), spec.edge_softness) * _edge_ramp(
            hy * size - np.abs(ys - cy), spec.edge_softness
        )
    else:
        sg = spec.sigma * size
        z = ((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sg * sg)
        values = np.maximum(0.0, (np.exp(-z) - _BLOB_CUTOFF) / (1.0 - _BLOB_CUTOFF))
    return Image2D(values)


def generate_phantom_pair(spec: PhantomSpec) -> tuple[Image2D, Image2D, Image2D]:
    """Render the endpoint slices and the exact halfway ground truth."""
    return render_phantom(spec, 0.0), render_phantom(spec, 1.0), render_phantom(spec, 0.5)
