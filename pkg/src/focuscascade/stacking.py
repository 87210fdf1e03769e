"""Focus stacking: merge chip-local detections from every scale into one list.

Steps per processed region: drop detections cropped by an interior chip
border, project the survivors to original-image coordinates, keep only sizes
inside the scale's valid range, then pool everything through per-category
Soft-NMS with a Gaussian decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .chips import FocusChip
from .geometry import BoxPx, Detection, PyramidConfig, Space, iou

__all__ = [
    "StackParams",
    "ChipCapture",
    "prune_boundary_detections",
    "filter_valid_range",
    "soft_nms",
    "focus_stack",
]


@dataclass(frozen=True)
class StackParams:
    """sigma: Gaussian decay width for Soft-NMS; score_floor: minimum score a
    detection may decay to and stay; boundary_tolerance: how close to a chip
    border (chip-local px) counts as touching it."""

    sigma: float = 0.55
    score_floor: float = 0.001
    boundary_tolerance: float = 1.0

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not (0.0 <= self.score_floor < 1.0):
            raise ValueError("score_floor must lie in [0, 1)")
        if self.boundary_tolerance < 0:
            raise ValueError("boundary_tolerance must be >= 0")


@dataclass(frozen=True)
class ChipCapture:
    """Detections of one processed region together with its geometry.

    chip: the region in its producing scale's px (a full-frame pseudo-chip for
        fully processed scales).
    scale_index: the scale the region was processed at.
    zoom: chip-local px per original px at that scale.
    origin_x/origin_y: crop origin in original-image px.
    frame_w/frame_h: chip-local frame dims in px.
    scaled_w/scaled_h: dims of the producing scale's full image, used to tell
        which chip borders coincide with image borders.
    """

    chip: FocusChip
    scale_index: int
    zoom: float
    origin_x: float
    origin_y: float
    frame_w: float
    frame_h: float
    scaled_w: float
    scaled_h: float
    detections: tuple[Detection, ...]


_EDGE_EPS = 1e-6


def prune_boundary_detections(
    dets: Sequence[Detection],
    chip: FocusChip,
    image_w: float,
    image_h: float,
    frame_w: float | None = None,
    frame_h: float | None = None,
    tolerance: float = 1.0,
) -> list[Detection]:
    """Drop detections cropped by an interior chip border.

    A detection (chip-local coords, clipped to the frame) is kept iff every
    side of it lying within `tolerance` of a chip border has that border
    coinciding with the image border. image_w/image_h are the full image dims
    in the chip rect's own space; frame_w/frame_h are the chip-local frame
    dims the detections are measured in (default: the chip rect's dims, i.e.
    an unzoomed crop).
    """
    rect = chip.rect
    if rect.x < -_EDGE_EPS or rect.y < -_EDGE_EPS or rect.x2 > image_w + _EDGE_EPS or rect.y2 > image_h + _EDGE_EPS:
        raise ValueError(f"chip {rect.as_tuple()} extends outside image {image_w}x{image_h}")
    fw = rect.w if frame_w is None else frame_w
    fh = rect.h if frame_h is None else frame_h
    at_image = (
        rect.x <= _EDGE_EPS,
        rect.y <= _EDGE_EPS,
        rect.x2 >= image_w - _EDGE_EPS,
        rect.y2 >= image_h - _EDGE_EPS,
    )
    kept = []
    for det in dets:
        b = det.box
        if b.space.kind != "chip":
            raise ValueError(f"expected chip-local detections, got {b.space}")
        touches = (b.x <= tolerance, b.y <= tolerance, b.x2 >= fw - tolerance, b.y2 >= fh - tolerance)
        if all(ok or not touching for touching, ok in zip(touches, at_image)):
            kept.append(det)
    return kept


def filter_valid_range(dets: Sequence[Detection], valid_range: tuple[float, float]) -> list[Detection]:
    """Keep detections whose sqrt(w*h) lies in the closed [lo, hi] range
    (original-image px; hi may be inf)."""
    lo, hi = valid_range
    if lo < 0 or lo > hi:
        raise ValueError(f"bad valid range [{lo}, {hi}]")
    for det in dets:
        if det.box.space.kind != "original":
            raise ValueError(f"valid-range filter expects original-space boxes, got {det.box.space}")
    return [d for d in dets if lo <= d.box.sqrt_area <= hi]


def _rank_key(det: Detection, score: float) -> tuple:
    cid = det.chip_id
    return (
        -score,
        det.box.x,
        det.box.y,
        det.box.w,
        det.box.h,
        det.category,
        det.scale_index if det.scale_index is not None else -1,
        cid is None,
        str(cid),
    )


def soft_nms(dets: Sequence[Detection], params: StackParams) -> list[Detection]:
    """Per-category Soft-NMS with Gaussian rescoring.

    Repeatedly selects the highest-scoring remaining detection, multiplies
    every same-category remaining score by exp(-iou^2 / sigma), and drops
    scores that fall below score_floor. Ties break on (score, box, category,
    scale) so the result is deterministic. Output is sorted by final score,
    descending.
    """
    for det in dets:
        if det.box.space.kind != "original":
            raise ValueError(f"soft_nms expects original-space boxes, got {det.box.space}")
    out: list[tuple[Detection, float]] = []
    for category in sorted({d.category for d in dets}):
        pool = [[d, d.score] for d in dets if d.category == category]
        while pool:
            pool.sort(key=lambda item: _rank_key(item[0], item[1]))
            kept, kept_score = pool.pop(0)
            out.append((kept, kept_score))
            for item in pool:
                overlap = iou(kept.box, item[0].box)
                if overlap > 0:
                    item[1] *= math.exp(-(overlap * overlap) / params.sigma)
            pool = [item for item in pool if item[1] >= params.score_floor]
    out.sort(key=lambda item: _rank_key(item[0], item[1]))
    return [replace(det, score=score) for det, score in out]


def _project_to_original(det: Detection, cap: ChipCapture) -> Detection:
    b = det.box
    box = BoxPx(
        b.x / cap.zoom + cap.origin_x,
        b.y / cap.zoom + cap.origin_y,
        b.w / cap.zoom,
        b.h / cap.zoom,
        Space.original(),
    )
    return replace(det, box=box)


def focus_stack(captures: Sequence[ChipCapture], config: PyramidConfig, params: StackParams) -> list[Detection]:
    """Prune, project, range-filter, and Soft-NMS detections from all captures."""
    pooled: list[Detection] = []
    for cap in captures:
        kept = prune_boundary_detections(
            cap.detections,
            cap.chip,
            cap.scaled_w,
            cap.scaled_h,
            frame_w=cap.frame_w,
            frame_h=cap.frame_h,
            tolerance=params.boundary_tolerance,
        )
        projected = [_project_to_original(d, cap) for d in kept]
        pooled.extend(filter_valid_range(projected, config.valid_range(cap.scale_index)))
    return soft_nms(pooled, params)
