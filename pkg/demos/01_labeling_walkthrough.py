"""Walk through the cell labeling rule on one small frame.

Cells covering an in-focus object (sqrt(area) in [5, 64]) are marked 1,
cells covering near-band objects are marked -1 (excluded from training
or thresholding), everything else is 0. Objects at or above the ignore
size contribute nothing at all.
"""

from focuscascade import BoxPx, LabelParams, Space, assign_labels, label_stats

CHIP = Space.chip(None)

GLYPHS = {1: "#", 0: ".", -1: "x"}


def show(labels):
    for row in labels:
        print("   " + "".join(GLYPHS[int(v)] for v in row))


def main():
    params = LabelParams()  # stride 16, bands [5, 64] and (64, 90)
    frame_w = frame_h = 192

    boxes = [
        BoxPx(24.0, 24.0, 30.0, 30.0, CHIP),   # sqrt 30  -> in focus
        BoxPx(120.0, 16.0, 72.0, 80.0, CHIP),  # sqrt ~76 -> near band
        BoxPx(16.0, 120.0, 4.0, 4.0, CHIP),    # sqrt 4   -> too small, near band
        BoxPx(96.0, 96.0, 90.0, 90.0, CHIP),   # sqrt 90  -> ignored entirely
    ]

    print(f"frame {frame_w}x{frame_h}, stride {params.stride}")
    for b in boxes:
        print(f"  box {b.as_tuple()} sqrt(area)={b.sqrt_area:.1f}")

    labels = assign_labels(boxes, frame_w, frame_h, params)
    print("\nlabel map (# = focus cell, x = excluded, . = background):")
    show(labels)

    stats = label_stats(labels)
    print(f"\ncounts: {stats.positive} focus, {stats.negative} background, {stats.invalid} excluded")

    print("\nthe focus cell never loses to an excluded mark; adding a near-band")
    print("box on top of the small one leaves its cells at 1:")
    overlapped = boxes + [BoxPx(16.0, 16.0, 70.0, 70.0, CHIP)]
    show(assign_labels(overlapped, frame_w, frame_h, params))


if __name__ == "__main__":
    main()
