"""Merging detections from two scales back into one image.

A large object is seen whole at the coarse scale and clipped at a chip
border at the fine scale; the clipped copy is pruned. A small object is
seen at both scales; after size filtering and soft suppression one copy
keeps its score and the duplicate is decayed.
"""

from focuscascade import (
    BoxPx,
    ChipCapture,
    Detection,
    FocusChip,
    PyramidConfig,
    Space,
    StackParams,
    focus_stack,
)

CHIP = Space.chip(None)


def main():
    # three scales with size ranges [90, inf), [30, 160], [0, 90]
    config = PyramidConfig.from_pairs([(480, 512), (800, 1280), (1400, 2000)])
    image_w = image_h = 1000

    # coarse scale: whole image at zoom 0.5
    big_whole = Detection(BoxPx(25.0, 25.0, 60.0, 60.0, CHIP), 1.0, 1, 1, 0)
    small_c = Detection(BoxPx(150.0, 150.0, 20.0, 20.0, CHIP), 0.9, 1, 1, 0)
    coarse = ChipCapture(
        chip=FocusChip(BoxPx(0.0, 0.0, 500.0, 500.0, Space.scaled(1)), 1, 0),
        scale_index=1, zoom=0.5, origin_x=0.0, origin_y=0.0,
        frame_w=500.0, frame_h=500.0, scaled_w=500.0, scaled_h=500.0,
        detections=(big_whole, small_c),
    )

    # fine scale: one chip; the big object pokes out of it and comes back clipped
    big_clipped = Detection(BoxPx(0.0, 0.0, 140.0, 140.0, CHIP), 0.95, 1, 3, 1)
    small_f = Detection(BoxPx(400.0, 400.0, 80.0, 80.0, CHIP), 1.0, 1, 3, 1)
    fine = ChipCapture(
        chip=FocusChip(BoxPx(100.0, 100.0, 400.0, 400.0, Space.scaled(2)), 2, 1),
        scale_index=3, zoom=2.0, origin_x=100.0, origin_y=100.0,
        frame_w=800.0, frame_h=800.0, scaled_w=1000.0, scaled_h=1000.0,
        detections=(big_clipped, small_f),
    )

    print("chip-local detections going in:")
    for cap in (coarse, fine):
        for det in cap.detections:
            print(f"   scale {cap.scale_index}: {det.box.as_tuple()} score {det.score}")

    finals = focus_stack([coarse, fine], config, StackParams())

    print("\nafter pruning, projection, size filtering, and soft suppression:")
    for det in finals:
        print(
            f"   {det.box.as_tuple()} score {det.score:.6f}"
            f" (from scale {det.scale_index}, sqrt area {det.box.sqrt_area:.0f})"
        )

    print("\nthe clipped copy of the big object is gone (its cut edge sat on an")
    print("interior chip border), and the small object's duplicate was decayed")
    print("instead of deleted.")


if __name__ == "__main__":
    main()
