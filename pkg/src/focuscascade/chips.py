"""Chip generation: turn a probability map into zoom-in regions.

Pipeline: threshold the map, dilate the resulting mask so chips keep context
around each hot cell, take 8-connected components, enclose each component in
a rectangle of at least the minimum side, and merge overlapping rectangles
until none overlap. Chip coordinates live in the scaled image that produced
the probability map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .geometry import BoxPx, Space, enclose, overlaps

__all__ = [
    "ChipParams",
    "Component",
    "FocusChip",
    "binarize",
    "dilate",
    "connected_components",
    "enclose_components",
    "merge_chips",
    "generate_chips",
]


@dataclass(frozen=True)
class ChipParams:
    """Knobs for chip generation (CLI flags --t/--d/--k).

    threshold: probability cutoff; strictly greater passes. 1.0 is allowed
        and yields no chips (single-scale degenerate mode).
    dilation: odd kernel side in cells; 1 disables dilation.
    min_chip_side: minimum chip side in scaled-image px.
    """

    threshold: float = 0.5
    dilation: int = 3
    min_chip_side: int = 512

    def __post_init__(self) -> None:
        if not (0.0 < self.threshold <= 1.0):
            raise ValueError("threshold must lie in (0, 1]")
        if self.dilation < 1 or self.dilation % 2 == 0:
            raise ValueError("dilation kernel side must be odd and >= 1")
        if self.min_chip_side < 1:
            raise ValueError("min_chip_side must be >= 1")


@dataclass(frozen=True)
class Component:
    """One 8-connected group of mask cells with its bounding rect (cell units,
    left/top inclusive)."""

    cells: tuple[tuple[int, int], ...]
    left: int
    top: int
    width: int
    height: int


@dataclass(frozen=True)
class FocusChip:
    """A zoom-in region: rect in the producing scale's image px, plus ids."""

    rect: BoxPx
    source_scale: int
    id: int


def binarize(prob: np.ndarray, threshold: float) -> np.ndarray:
    """Boolean mask of cells strictly above the threshold."""
    arr = np.asarray(prob)
    if arr.ndim != 2:
        raise ValueError("probability map must be 2-D")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("probability values must lie in [0, 1]")
    return arr > threshold


def dilate(mask: np.ndarray, d: int) -> np.ndarray:
    """Grow a mask by Chebyshev radius (d-1)/2 (square d x d kernel), clipped
    at the map border. d must be odd; d=1 returns a copy."""
    if d < 1 or d % 2 == 0:
        raise ValueError("dilation kernel side must be odd and >= 1")
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2:
        raise ValueError("mask must be 2-D")
    if d == 1 or not m.any():
        return m.copy()
    return ndimage.binary_dilation(m, structure=np.ones((d, d), dtype=bool))


def connected_components(mask: np.ndarray) -> list[Component]:
    """8-connected components, ordered row-major by bounding-rect top-left."""
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2:
        raise ValueError("mask must be 2-D")
    labeled, count = ndimage.label(m, structure=np.ones((3, 3), dtype=bool))
    comps: list[Component] = []
    for index, sl in enumerate(ndimage.find_objects(labeled), start=1):
        if sl is None:
            continue
        rows, cols = sl
        block = labeled[sl] == index
        rr, cc = np.nonzero(block)
        cells = tuple(sorted(zip((rr + rows.start).tolist(), (cc + cols.start).tolist())))
        comps.append(
            Component(
                cells=cells,
                left=cols.start,
                top=rows.start,
                width=cols.stop - cols.start,
                height=rows.stop - rows.start,
            )
        )
    comps.sort(key=lambda c: (c.top, c.left, c.height, c.width))
    return comps


def _expand_axis(lo: float, extent: float, minimum: float, limit: float) -> tuple[float, float]:
    # Grow [lo, lo+extent) symmetrically to the minimum side (odd pixel goes
    # to the high end), then shift — never shrink — back inside [0, limit).
    target = min(float(minimum), limit)
    if extent < target:
        pad = target - extent
        lo -= math.floor(pad / 2)
        extent = target
    if lo < 0:
        lo = 0.0
    elif lo + extent > limit:
        lo = limit - extent
    return lo, extent


def enclose_components(
    components: Sequence[Component],
    min_side: float,
    image_w: float,
    image_h: float,
    stride: int,
    source_scale: int = 1,
) -> list[FocusChip]:
    """Scale component rects to image px (by the stride) and enforce the
    minimum side. A dimension smaller than min_side makes the chip span it
    fully. Chip ids are positional."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if image_w <= 0 or image_h <= 0:
        raise ValueError("image dims must be positive")
    space = Space.scaled(source_scale)
    chips = []
    for i, comp in enumerate(components):
        x = float(comp.left * stride)
        y = float(comp.top * stride)
        w = min(float(comp.width * stride), image_w - x)
        h = min(float(comp.height * stride), image_h - y)
        x, w = _expand_axis(x, w, min_side, image_w)
        y, h = _expand_axis(y, h, min_side, image_h)
        chips.append(FocusChip(BoxPx(x, y, w, h, space), source_scale, i))
    return chips


def merge_chips(chips: Sequence[FocusChip]) -> list[FocusChip]:
    """Replace overlapping pairs (positive intersection area) with their
    enclosing rectangle until no pair overlaps. Edge-touching chips stay
    separate. Output is sorted row-major and renumbered from 0."""
    rects = [c.rect for c in chips]
    if rects:
        scale = chips[0].source_scale
        for c in chips[1:]:
            if c.source_scale != scale or c.rect.space != rects[0].space:
                raise ValueError("cannot merge chips from different scales")
    else:
        return []
    changed = True
    while changed:
        changed = False
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if overlaps(rects[i], rects[j]):
                    rects[i] = enclose(rects[i], rects[j])
                    del rects[j]
                    changed = True
                    break
            if changed:
                break
    rects.sort(key=lambda r: (r.y, r.x, r.h, r.w))
    return [FocusChip(r, chips[0].source_scale, i) for i, r in enumerate(rects)]


def generate_chips(
    prob: np.ndarray,
    params: ChipParams,
    image_w: float,
    image_h: float,
    stride: int,
    source_scale: int = 1,
) -> list[FocusChip]:
    """Full chip pipeline for one probability map.

    The map must have shape (ceil(image_h / stride), ceil(image_w / stride)).
    Returns deterministic, pairwise non-overlapping chips; an all-cold map
    yields an empty list.
    """
    arr = np.asarray(prob)
    cols, rows = math.ceil(image_w / stride), math.ceil(image_h / stride)
    if arr.shape != (rows, cols):
        raise ValueError(
            f"map shape {arr.shape} does not match ceil({image_h}/{stride}) x ceil({image_w}/{stride})"
        )
    mask = dilate(binarize(arr, params.threshold), params.dilation)
    comps = connected_components(mask)
    chips = enclose_components(comps, params.min_chip_side, image_w, image_h, stride, source_scale)
    return merge_chips(chips)
