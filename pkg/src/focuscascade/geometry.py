"""Coordinate spaces, boxes, scale specs, and box projection.

Every rectangle in this library carries an explicit coordinate-space tag:
the original image, a scaled image, a feature map, or a chip-local frame.
Operations that combine boxes require identical tags and raise
:class:`SpaceMismatchError` otherwise — there is no silent casting.

All types are immutable and all functions are pure, so everything here is
safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

__all__ = [
    "Space",
    "SpaceMismatchError",
    "ProjectionError",
    "BoxPx",
    "Detection",
    "ScaleSpec",
    "PyramidConfig",
    "ChipGeom",
    "ProjectionGeometry",
    "iou",
    "intersection_area",
    "enclose",
    "overlaps",
    "project_box",
    "resize_factor",
    "resized_dims",
    "round_half_up",
]

_SPACE_KINDS = ("original", "scaled", "feature", "chip")


class SpaceMismatchError(ValueError):
    """Boxes from different coordinate spaces were combined."""


class ProjectionError(ValueError):
    """A requested projection is undefined or lacks the needed geometry."""


@dataclass(frozen=True)
class Space:
    """Coordinate-space tag.

    Attributes:
        kind: one of "original", "scaled", "feature", "chip".
        index: scale index for scaled/feature spaces, chip id for chip-local
            frames (None while a detector has not been told the chip id),
            and None for the original image.
    """

    kind: str
    index: int | str | None = None

    def __post_init__(self) -> None:
        if self.kind not in _SPACE_KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "original" and self.index is not None:
            raise ValueError("original space takes no index")
        if self.kind in ("scaled", "feature") and not isinstance(self.index, int):
            raise ValueError(f"{self.kind} space needs an integer scale index")

    @classmethod
    def original(cls) -> "Space":
        return cls("original")

    @classmethod
    def scaled(cls, index: int) -> "Space":
        return cls("scaled", index)

    @classmethod
    def feature(cls, index: int) -> "Space":
        return cls("feature", index)

    @classmethod
    def chip(cls, ident: int | str | None = None) -> "Space":
        return cls("chip", ident)

    def __str__(self) -> str:
        if self.kind == "original" or self.index is None:
            return self.kind
        return f"{self.kind}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> "Space":
        """Inverse of ``str(space)``, used by the file formats."""
        if text == "original":
            return cls.original()
        if text == "chip":
            return cls.chip(None)
        kind, sep, raw = text.partition(":")
        if not sep or kind not in _SPACE_KINDS:
            raise ValueError(f"unparsable space tag {text!r}")
        index: int | str
        try:
            index = int(raw)
        except ValueError:
            index = raw
        return cls(kind, index)


@dataclass(frozen=True)
class BoxPx:
    """Axis-aligned rectangle with continuous pixel (or cell) coordinates.

    (x, y) is the top-left corner; width and height must be positive.
    Feature-map boxes are measured in cells, every other space in pixels.
    """

    x: float
    y: float
    w: float
    h: float
    space: Space

    def __post_init__(self) -> None:
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box needs positive extent, got w={self.w}, h={self.h}")

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def sqrt_area(self) -> float:
        return math.sqrt(self.w * self.h)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


def _require_same_space(a: BoxPx, b: BoxPx) -> None:
    if a.space != b.space:
        raise SpaceMismatchError(f"cannot combine boxes from {a.space} and {b.space}")


def intersection_area(a: BoxPx, b: BoxPx) -> float:
    """Overlap area of two boxes from the same space (0.0 when disjoint)."""
    _require_same_space(a, b)
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def overlaps(a: BoxPx, b: BoxPx) -> bool:
    """True when the boxes share positive area (edge contact is not overlap)."""
    return intersection_area(a, b) > 0


def iou(a: BoxPx, b: BoxPx) -> float:
    """Intersection over union in [0, 1]; exactly 1.0 only for identical boxes."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    union = a.area + b.area - inter
    return inter / union


def enclose(a: BoxPx, b: BoxPx) -> BoxPx:
    """Smallest box containing both inputs (same space required)."""
    _require_same_space(a, b)
    x = min(a.x, b.x)
    y = min(a.y, b.y)
    return BoxPx(x, y, max(a.x2, b.x2) - x, max(a.y2, b.y2) - y, a.space)


@dataclass(frozen=True)
class Detection:
    """A scored candidate box.

    scale_index and chip_id record where the detection was produced; the
    cascade fills them in, so detectors may leave them as None.
    """

    box: BoxPx
    score: float
    category: int
    scale_index: int | None = None
    chip_id: int | str | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class ScaleSpec:
    """Resize target for one pyramid level: shorter side toward min_side,
    longer side capped at max_side. index is 1-based, 1 = coarsest."""

    min_side: float
    max_side: float
    index: int

    def __post_init__(self) -> None:
        if not (0 < self.min_side <= self.max_side):
            raise ValueError("need 0 < min_side <= max_side")
        if self.index < 1:
            raise ValueError("scale index is 1-based")


def resize_factor(spec: ScaleSpec, image_w: float, image_h: float) -> float:
    """Zoom applied to an image so it fits the scale spec.

    zoom = min(min_side / min(w, h), max_side / max(w, h)); the shorter side
    reaches min_side unless the longer side would exceed max_side first.
    """
    if image_w <= 0 or image_h <= 0:
        raise ValueError("image dims must be positive")
    return min(spec.min_side / min(image_w, image_h), spec.max_side / max(image_w, image_h))


def round_half_up(x: float) -> int:
    """Round to nearest integer, ties away from zero toward +inf."""
    return math.floor(x + 0.5)


def resized_dims(spec: ScaleSpec, image_w: float, image_h: float) -> tuple[int, int]:
    """Pixel dims of the image after applying resize_factor (round half up)."""
    z = resize_factor(spec, image_w, image_h)
    return max(1, round_half_up(image_w * z)), max(1, round_half_up(image_h * z))


_DEFAULT_THREE_SCALE_RANGES = ((90.0, math.inf), (30.0, 160.0), (0.0, 90.0))


def _default_ranges(n: int) -> tuple[tuple[float, float], ...]:
    if n == 3:
        return _DEFAULT_THREE_SCALE_RANGES
    return tuple((0.0, math.inf) for _ in range(n))


@dataclass(frozen=True)
class PyramidConfig:
    """Scales processed coarse to fine, plus the per-scale valid size ranges.

    valid_ranges[i] is a closed interval [lo, hi] on sqrt(w*h) in original-image
    pixels: only detections whose size falls inside the range survive focus
    stacking for that scale. The ranges must jointly cover every positive size
    so that no object is unrepresentable at all scales.
    """

    scales: tuple[ScaleSpec, ...]
    stride: int = 16
    valid_ranges: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.scales:
            raise ValueError("need at least one scale")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        indices = [s.index for s in self.scales]
        if indices != sorted(indices) or len(set(indices)) != len(indices):
            raise ValueError("scale indices must be strictly increasing")
        for prev, cur in zip(self.scales, self.scales[1:]):
            if cur.min_side < prev.min_side or cur.max_side < prev.max_side:
                raise ValueError("scales must be ordered coarse to fine")
        ranges = self.valid_ranges or _default_ranges(len(self.scales))
        object.__setattr__(self, "valid_ranges", tuple((float(lo), float(hi)) for lo, hi in ranges))
        if len(self.valid_ranges) != len(self.scales):
            raise ValueError("one valid range per scale")
        for lo, hi in self.valid_ranges:
            if lo < 0 or lo > hi:
                raise ValueError(f"bad valid range [{lo}, {hi}]")
        self._check_coverage()

    def _check_coverage(self) -> None:
        spans = sorted(self.valid_ranges)
        if spans[0][0] > 0:
            raise ValueError("valid ranges leave sizes near 0 uncovered")
        reach = spans[0][1]
        for lo, hi in spans[1:]:
            if lo > reach:
                raise ValueError(f"valid ranges leave a gap below {lo}")
            reach = max(reach, hi)
        if not math.isinf(reach):
            raise ValueError("valid ranges leave large sizes uncovered")

    @classmethod
    def from_pairs(
        cls,
        pairs: Sequence[tuple[float, float]],
        stride: int = 16,
        valid_ranges: Sequence[tuple[float, float]] | None = None,
    ) -> "PyramidConfig":
        scales = tuple(ScaleSpec(lo, hi, i + 1) for i, (lo, hi) in enumerate(pairs))
        return cls(scales, stride, tuple(valid_ranges) if valid_ranges else ())

    def scale_by_index(self, index: int) -> ScaleSpec:
        for s in self.scales:
            if s.index == index:
                return s
        raise KeyError(f"no scale with index {index}")

    def valid_range(self, index: int) -> tuple[float, float]:
        for s, r in zip(self.scales, self.valid_ranges):
            if s.index == index:
                return r
        raise KeyError(f"no scale with index {index}")

    def zooms(self, image_w: float, image_h: float) -> dict[int, float]:
        return {s.index: resize_factor(s, image_w, image_h) for s in self.scales}


@dataclass(frozen=True)
class ChipGeom:
    """Crop geometry of one chip-local frame: origin in original-image px and
    the zoom (chip-local px per original px) it was resized with."""

    origin_x: float
    origin_y: float
    zoom: float

    def __post_init__(self) -> None:
        if self.zoom <= 0:
            raise ValueError("zoom must be positive")


@dataclass(frozen=True)
class ProjectionGeometry:
    """Everything project_box needs: per-scale zooms, the feature-map stride,
    and per-chip crop geometry keyed by chip id."""

    zooms: Mapping[int, float]
    stride: int = 1
    chips: Mapping[int | str, ChipGeom] = field(default_factory=dict)


def _scale_zoom(geom: ProjectionGeometry, index: object) -> float:
    try:
        return geom.zooms[index]  # type: ignore[index]
    except KeyError:
        raise ProjectionError(f"no zoom recorded for scale {index}") from None


def _chip_geom(geom: ProjectionGeometry, ident: object) -> ChipGeom:
    try:
        return geom.chips[ident]  # type: ignore[index]
    except KeyError:
        raise ProjectionError(f"no geometry recorded for chip {ident!r}") from None


def _to_original(box: BoxPx, geom: ProjectionGeometry) -> BoxPx:
    space = box.space
    if space.kind == "original":
        return box
    if space.kind == "scaled":
        z = _scale_zoom(geom, space.index)
        return BoxPx(box.x / z, box.y / z, box.w / z, box.h / z, Space.original())
    if space.kind == "feature":
        z = _scale_zoom(geom, space.index)
        s = geom.stride
        return BoxPx(box.x * s / z, box.y * s / z, box.w * s / z, box.h * s / z, Space.original())
    if space.kind == "chip":
        g = _chip_geom(geom, space.index)
        z = g.zoom
        return BoxPx(box.x / z + g.origin_x, box.y / z + g.origin_y, box.w / z, box.h / z, Space.original())
    raise ProjectionError(f"unknown space pair: {space} -> original")


def project_box(box: BoxPx, to: Space, geom: ProjectionGeometry) -> BoxPx:
    """Project a box into another coordinate space.

    chip-local -> original divides by the chip's zoom and translates by its
    origin; original -> feature-map multiplies by the scale zoom and divides
    by the stride. Any pair of known spaces is reached by routing through the
    original image. Raises ProjectionError when the geometry lacks the zoom
    or chip entry the route needs.
    """
    if box.space == to:
        return box
    orig = _to_original(box, geom)
    if to.kind == "original":
        return orig
    if to.kind == "scaled":
        z = _scale_zoom(geom, to.index)
        return BoxPx(orig.x * z, orig.y * z, orig.w * z, orig.h * z, to)
    if to.kind == "feature":
        z = _scale_zoom(geom, to.index)
        s = geom.stride
        return BoxPx(orig.x * z / s, orig.y * z / s, orig.w * z / s, orig.h * z / s, to)
    if to.kind == "chip":
        g = _chip_geom(geom, to.index)
        return BoxPx(
            (orig.x - g.origin_x) * g.zoom,
            (orig.y - g.origin_y) * g.zoom,
            orig.w * g.zoom,
            orig.h * g.zoom,
            to,
        )
    raise ProjectionError(f"unknown space pair: {box.space} -> {to}")
