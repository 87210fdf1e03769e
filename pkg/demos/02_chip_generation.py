"""From a probability map to chips, one stage at a time.

binarize -> dilate -> connected components -> enclose with a minimum
side -> merge overlaps. The printout shows the map before and after
dilation and the final chip rectangles in image pixels.
"""

import numpy as np

from focuscascade import (
    ChipParams,
    binarize,
    connected_components,
    dilate,
    generate_chips,
)


def show(mask):
    for row in mask:
        print("   " + "".join("#" if v else "." for v in row))


def main():
    rng = np.random.default_rng(6)
    rows = cols = 16
    stride = 16
    image_w, image_h = cols * stride, rows * stride

    pmap = rng.uniform(0.0, 0.45, (rows, cols))
    pmap[3:5, 2:4] = 0.95    # a confident blob
    pmap[4, 5] = 0.80        # close enough to fuse after dilation
    pmap[11:13, 10:12] = 0.9  # a second, separate blob

    params = ChipParams(threshold=0.5, dilation=3, min_chip_side=96)

    hot = binarize(pmap, params.threshold)
    print(f"cells above t={params.threshold}:")
    show(hot)

    grown = dilate(hot, params.dilation)
    print(f"\nafter {params.dilation}x{params.dilation} dilation (margin for the crops):")
    show(grown)

    comps = connected_components(grown)
    print(f"\n{len(comps)} component(s):")
    for comp in comps:
        print(f"   cells rows {comp.top}..{comp.top + comp.height - 1}, cols {comp.left}..{comp.left + comp.width - 1}")

    chips = generate_chips(pmap, params, image_w, image_h, stride)
    print(f"\nchips at minimum side {params.min_chip_side}px (image {image_w}x{image_h}):")
    for chip in chips:
        print(f"   chip {chip.id}: {chip.rect.as_tuple()}")

    print("\nraising the minimum side forces merges; at 400px one chip remains:")
    for chip in generate_chips(pmap, ChipParams(0.5, 3, 400), image_w, image_h, stride):
        print(f"   chip {chip.id}: {chip.rect.as_tuple()}")


if __name__ == "__main__":
    main()
