"""Analysis metrics: focus recall curves, the oracle speedup bound, and AP.

Conventions pinned here:
  - recall is 1.0 when there is nothing to recall (avoids 0/0),
  - a ground-truth box counts as covered by chips only when one single chip
    fully contains it,
  - average precision uses greedy per-category matching in descending score
    order with 101-point interpolated precision, macro-averaged over the
    categories that have ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .cascade import OracleDetector, OracleNoise, Scene, run_cascade
from .chips import ChipParams, FocusChip
from .geometry import BoxPx, Detection, PyramidConfig, iou
from .labeling import POSITIVE, LabelParams

__all__ = [
    "CurvePoint",
    "APResult",
    "focuspixel_recall",
    "confident_subset",
    "focuschip_recall",
    "speedup_bound",
    "average_precision",
    "DEFAULT_IOU_THRESHOLDS",
]

DEFAULT_IOU_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class CurvePoint:
    """One point on a recall-vs-area curve: x is the screened-area ratio,
    y the recall, param the swept value that produced the point."""

    x: float
    y: float
    param: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError("curve coordinates must lie in [0, 1]")


def focuspixel_recall(
    pred_map: np.ndarray, gt_label_map: np.ndarray, threshold: float
) -> tuple[float, float]:
    """Cell-level recall of the positive label cells at a threshold.

    Returns (recall, area_ratio): recall is the fraction of positive-labeled
    cells where pred > threshold (1.0 when there are no positives);
    area_ratio is the fraction of all cells where pred > threshold.
    """
    pred = np.asarray(pred_map, dtype=np.float64)
    labels = np.asarray(gt_label_map)
    if pred.shape != labels.shape:
        raise ValueError(f"map dims {pred.shape} do not match label dims {labels.shape}")
    fired = pred > threshold
    positives = labels == POSITIVE
    n_pos = int(positives.sum())
    recall = 1.0 if n_pos == 0 else float((fired & positives).sum()) / n_pos
    area_ratio = float(fired.sum()) / pred.size if pred.size else 0.0
    return recall, area_ratio


def confident_subset(
    gts: Sequence[BoxPx],
    dets: Sequence[Detection],
    iou_min: float = 0.5,
    score_min: float = 0.5,
) -> list[BoxPx]:
    """Ground-truth boxes covered by a confident detection.

    A box is kept iff some detection has iou strictly above iou_min and score
    strictly above score_min. Both comparisons are strict, so a detection at
    exactly the minimum does not count.
    """
    strong = [d for d in dets if d.score > score_min]
    return [g for g in gts if any(iou(g, d.box) > iou_min for d in strong)]


def focuschip_recall(
    chips: Sequence[FocusChip],
    gts: Sequence[BoxPx],
    image_w: float,
    image_h: float,
) -> tuple[float, float]:
    """Box-level recall of chips over ground truth, plus the chip-area ratio.

    A box counts iff a single chip fully contains it; straddling two adjacent
    chips does not count. area_ratio sums chip areas over the image area
    (chips from one map never overlap, so the sum never double counts).
    """
    if image_w <= 0 or image_h <= 0:
        raise ValueError("image dims must be positive")
    eps = 1e-9

    def enclosed(g: BoxPx) -> bool:
        return any(
            c.rect.x <= g.x + eps
            and c.rect.y <= g.y + eps
            and c.rect.x2 >= g.x2 - eps
            and c.rect.y2 >= g.y2 - eps
            for c in chips
        )

    recall = 1.0 if not gts else sum(1 for g in gts if enclosed(g)) / len(gts)
    area_ratio = sum(c.rect.area for c in chips) / (image_w * image_h)
    return recall, area_ratio


def speedup_bound(
    scene: Scene,
    config: PyramidConfig,
    label_params: LabelParams | None = None,
    base_chip_params: ChipParams | None = None,
    ks: Sequence[int] = (512,),
) -> list[tuple[int, float]]:
    """Best-case pixel speedup at each minimum chip side k.

    Runs the cascade with a noise-free oracle (so the focus maps are exactly
    the ground-truth labels) and reads the pixel report; the result bounds
    what any trained model could save at that k.
    """
    label_params = label_params or LabelParams()
    base = base_chip_params or ChipParams()
    detector = OracleDetector(OracleNoise(), label_params)
    curve = []
    for k in ks:
        result = run_cascade(scene, detector, config, replace(base, min_chip_side=int(k)))
        curve.append((int(k), result.report.speedup))
    return curve


def _category_ap(
    dets: list[Detection], gt_boxes: list[BoxPx], iou_thr: float
) -> float:
    """101-point interpolated AP for one category at one IoU threshold."""
    n_gt = len(gt_boxes)
    order = sorted(dets, key=lambda d: (-d.score, d.box.x, d.box.y, d.box.w, d.box.h))
    matched = [False] * n_gt
    tp_flags = []
    for det in order:
        best, best_iou = -1, 0.0
        for i, g in enumerate(gt_boxes):
            if matched[i]:
                continue
            v = iou(det.box, g)
            if v >= iou_thr and v > best_iou:
                best, best_iou = i, v
        if best >= 0:
            matched[best] = True
            tp_flags.append(True)
        else:
            tp_flags.append(False)
    precisions, recalls = [], []
    tp = fp = 0
    for flag in tp_flags:
        tp += int(flag)
        fp += int(not flag)
        precisions.append(tp / (tp + fp))
        recalls.append(tp / n_gt)
    total = 0.0
    for i in range(101):
        level = i / 100.0
        best_p = 0.0
        for p, r in zip(precisions, recalls):
            if r >= level and p > best_p:
                best_p = p
        total += best_p
    return total / 101.0


@dataclass(frozen=True)
class APResult:
    """Average precision per IoU threshold plus their mean."""

    per_threshold: tuple[tuple[float, float], ...]
    mean_ap: float


def average_precision(
    dets: Sequence[Detection],
    gts: Sequence[tuple[BoxPx, int]],
    iou_thresholds: Sequence[float] = DEFAULT_IOU_THRESHOLDS,
) -> APResult:
    """COCO-style average precision over detections and categorized boxes.

    Matching is greedy in descending score within each category: a detection
    claims the unmatched box with the highest IoU at or above the threshold.
    AP per category uses 101-point interpolation; the reported AP at each
    threshold is the mean over categories that have ground truth (0.0 when
    there is no ground truth at all).
    """
    if not iou_thresholds:
        raise ValueError("need at least one IoU threshold")
    gt_by_cat: dict[int, list[BoxPx]] = {}
    for box, category in gts:
        gt_by_cat.setdefault(category, []).append(box)
    det_by_cat: dict[int, list[Detection]] = {}
    for det in dets:
        det_by_cat.setdefault(det.category, []).append(det)

    per_threshold = []
    for thr in iou_thresholds:
        if not gt_by_cat:
            per_threshold.append((float(thr), 0.0))
            continue
        aps = [
            _category_ap(det_by_cat.get(cat, []), boxes, float(thr))
            for cat, boxes in sorted(gt_by_cat.items())
        ]
        per_threshold.append((float(thr), sum(aps) / len(aps)))
    mean_ap = sum(ap for _, ap in per_threshold) / len(per_threshold)
    return APResult(tuple(per_threshold), mean_ap)
