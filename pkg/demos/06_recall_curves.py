"""Recall and processed-area curves for a noisy probability map.

Sweeping the binarization threshold trades the fraction of cells that
fire (area to re-process) against cell-level recall of the true focus
cells. A perfect map keeps recall at 1.0 everywhere below 1, and its
chips enclose every in-focus object.
"""

import numpy as np

from focuscascade import (
    BoxPx,
    ChipParams,
    LabelParams,
    Space,
    assign_labels,
    focuschip_recall,
    focuspixel_recall,
    generate_chips,
)

CHIP = Space.chip(None)


def main():
    rng = np.random.default_rng(3)
    params = LabelParams()
    frame_w = frame_h = 512

    boxes = []
    for _ in range(6):
        size = float(rng.uniform(10, 60))
        x = float(rng.uniform(0, frame_w - size))
        y = float(rng.uniform(0, frame_h - size))
        boxes.append(BoxPx(x, y, size, size, CHIP))
    labels = assign_labels(boxes, frame_w, frame_h, params)

    clean = (labels == 1).astype(np.float64)
    noisy = np.clip(clean * rng.uniform(0.5, 1.0, labels.shape) + rng.uniform(0, 0.45, labels.shape), 0, 1)

    print("noisy map, threshold sweep:")
    print("   t     area fired   recall")
    for t in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7):
        recall, ratio = focuspixel_recall(noisy, labels, t)
        print(f"   {t:.1f}   {ratio:10.3f}   {recall:.3f}")

    print("\nperfect map: recall stays at 1.0 for every threshold below 1")
    for t in (0.25, 0.5, 0.75, 0.99):
        recall, ratio = focuspixel_recall(clean, labels, t)
        print(f"   t={t:.2f}: recall {recall:.1f}, area {ratio:.3f}")

    chips = generate_chips(clean, ChipParams(min_chip_side=64), frame_w, frame_h, params.stride)
    recall, ratio = focuschip_recall(chips, boxes, frame_w, frame_h)
    print(f"\nchips from the perfect map: {len(chips)} chip(s),")
    print(f"object recall {recall:.1f} over {ratio:.3f} of the frame")


if __name__ == "__main__":
    main()
