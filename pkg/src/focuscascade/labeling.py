"""Focus-pixel label maps: which feature-map cells sit on suitably small objects.

A cell (a stride x stride block of the scaled frame, partial at the right and
bottom edges) is labeled +1 when it overlaps a ground-truth box whose
sqrt(area) — measured in the frame the boxes are given in — falls inside the
small-object band [small_min, small_max]. Cells that only overlap boxes just
outside the band (below small_min, or between small_max and ignore_max) are
labeled -1 and excluded from training statistics. Everything else, including
cells under very large objects (sqrt(area) >= ignore_max), stays 0. +1 always
wins over -1 when a cell overlaps several boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import BoxPx, SpaceMismatchError

__all__ = [
    "POSITIVE",
    "NEGATIVE",
    "INVALID",
    "LabelParams",
    "LabelStats",
    "label_map_dims",
    "assign_labels",
    "label_stats",
]

POSITIVE = 1
NEGATIVE = 0
INVALID = -1


@dataclass(frozen=True)
class LabelParams:
    """Cell size and the size bands that split objects into positive /
    invalid / background, all in the pixels of the labeled frame.

    Exposed on the command line as --stride/--a/--b/--c.
    """

    stride: int = 16
    small_min: float = 5.0
    small_max: float = 64.0
    ignore_max: float = 90.0

    def __post_init__(self) -> None:
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not (0 < self.small_min < self.small_max < self.ignore_max):
            raise ValueError("need 0 < small_min < small_max < ignore_max")


@dataclass(frozen=True)
class LabelStats:
    """Counts per label value plus the positive:negative ratio (inf when the
    map has positives but no negatives)."""

    positive: int
    negative: int
    invalid: int

    @property
    def total(self) -> int:
        return self.positive + self.negative + self.invalid

    @property
    def positive_negative_ratio(self) -> float:
        if self.negative > 0:
            return self.positive / self.negative
        return math.inf if self.positive > 0 else 0.0


def label_map_dims(chip_w: float, chip_h: float, stride: int) -> tuple[int, int]:
    """(columns, rows) of the label grid: ceil(dim / stride), partial cells kept."""
    if chip_w <= 0 or chip_h <= 0:
        raise ValueError("chip dims must be positive")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return math.ceil(chip_w / stride), math.ceil(chip_h / stride)


def _cell_span(lo: float, hi: float, stride: int, n_cells: int) -> tuple[int, int]:
    # Cells [c0, c1] have positive-length overlap with the interval [lo, hi).
    c0 = max(0, math.floor(lo / stride))
    c1 = min(n_cells - 1, math.ceil(hi / stride) - 1)
    return c0, c1


def assign_labels(
    gt_boxes: Sequence[BoxPx],
    chip_w: float,
    chip_h: float,
    params: LabelParams,
) -> np.ndarray:
    """Label every cell of a chip_w x chip_h frame.

    Args:
        gt_boxes: ground-truth boxes already clipped to the frame, all carrying
            the same coordinate-space tag (the frame's own space).
        chip_w, chip_h: frame extent in pixels.
        params: cell stride and size bands.

    Returns:
        int8 array of shape (rows, cols) with values {+1, 0, -1}.

    Raises:
        SpaceMismatchError: boxes carry differing space tags.
        ValueError: a box lies outside the frame.
    """
    cols, rows = label_map_dims(chip_w, chip_h, params.stride)
    labels = np.zeros((rows, cols), dtype=np.int8)
    if not gt_boxes:
        return labels

    tag = gt_boxes[0].space
    if tag.kind not in ("chip", "scaled"):
        raise SpaceMismatchError(f"labels need frame-local boxes, got {tag}")
    eps = 1e-6
    positive = np.zeros_like(labels, dtype=bool)
    invalid = np.zeros_like(labels, dtype=bool)
    for box in gt_boxes:
        if box.space != tag:
            raise SpaceMismatchError(f"mixed GT spaces: {tag} vs {box.space}")
        if box.x < -eps or box.y < -eps or box.x2 > chip_w + eps or box.y2 > chip_h + eps:
            raise ValueError(f"GT box {box.as_tuple()} outside frame {chip_w}x{chip_h}")
        size = box.sqrt_area
        if size >= params.ignore_max:
            continue
        c0, c1 = _cell_span(box.x, box.x2, params.stride, cols)
        r0, r1 = _cell_span(box.y, box.y2, params.stride, rows)
        if c1 < c0 or r1 < r0:
            continue
        if params.small_min <= size <= params.small_max:
            positive[r0 : r1 + 1, c0 : c1 + 1] = True
        else:
            invalid[r0 : r1 + 1, c0 : c1 + 1] = True

    labels[invalid] = INVALID
    labels[positive] = POSITIVE
    return labels


def label_stats(labels: np.ndarray) -> LabelStats:
    """Count label values over a map produced by assign_labels."""
    arr = np.asarray(labels)
    return LabelStats(
        positive=int((arr == POSITIVE).sum()),
        negative=int((arr == NEGATIVE).sum()),
        invalid=int((arr == INVALID).sum()),
    )
