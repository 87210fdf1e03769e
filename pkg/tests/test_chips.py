import numpy as np
import pytest

from focuscascade import (
    BoxPx,
    ChipParams,
    FocusChip,
    Space,
    binarize,
    connected_components,
    dilate,
    enclose_components,
    generate_chips,
    merge_chips,
)

from _reference import reference_chips


def mask_with(cells, shape=(20, 20)):
    m = np.zeros(shape, dtype=bool)
    for r, c in cells:
        m[r, c] = True
    return m


def chip(x, y, w, h, scale=1, cid=0):
    return FocusChip(BoxPx(x, y, w, h, Space.scaled(scale)), scale, cid)


def rects(chips):
    return sorted(c.rect.as_tuple() for c in chips)


def test_binarize_basic():
    m = np.array([[0.4, 0.6], [0.5, 0.0]])
    out = binarize(m, 0.5)
    assert out.tolist() == [[False, True], [False, False]]
    assert not binarize(np.zeros((3, 3)), 0.5).any()


def test_binarize_threshold_is_strict():
    assert not binarize(np.array([[0.5]]), 0.5)[0, 0]


def test_binarize_rejects_bad_values():
    with pytest.raises(ValueError):
        binarize(np.array([[1.5]]), 0.5)
    with pytest.raises(ValueError):
        binarize(np.zeros(4), 0.5)


def test_chip_params_validation():
    with pytest.raises(ValueError):
        ChipParams(threshold=0.0)
    with pytest.raises(ValueError):
        ChipParams(dilation=2)
    with pytest.raises(ValueError):
        ChipParams(min_chip_side=0)
    ChipParams(threshold=1.0)  # degenerate but legal: nothing ever fires


def test_dilate_single_bit():
    out = dilate(mask_with([(10, 10)]), 3)
    assert sorted(map(tuple, np.argwhere(out))) == [(r, c) for r in (9, 10, 11) for c in (9, 10, 11)]


def test_dilate_identity_and_border():
    m = mask_with([(0, 0)])
    assert np.array_equal(dilate(m, 1), m)
    out = dilate(m, 3)
    assert sorted(map(tuple, np.argwhere(out))) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_dilate_even_kernel_rejected():
    with pytest.raises(ValueError):
        dilate(mask_with([(1, 1)]), 4)


def test_components_empty():
    assert connected_components(np.zeros((5, 5), dtype=bool)) == []


def test_components_diagonal_joined():
    comps = connected_components(mask_with([(0, 0), (1, 1)]))
    assert len(comps) == 1
    assert set(comps[0].cells) == {(0, 0), (1, 1)}


def test_components_split():
    comps = connected_components(mask_with([(0, 0), (0, 5)]))
    assert len(comps) == 2
    assert comps[0].left == 0 and comps[1].left == 5


def test_enclose_pads_to_min_side():
    comps = connected_components(mask_with([(r, c) for r in (9, 10, 11) for c in (9, 10, 11)]))
    chips = enclose_components(comps, 8, 20, 20, stride=1)
    assert rects(chips) == [(7.0, 7.0, 8.0, 8.0)]


def test_enclose_shifts_at_corner():
    comps = connected_components(mask_with([(0, 0), (0, 1), (1, 0), (1, 1)]))
    chips = enclose_components(comps, 8, 20, 20, stride=1)
    assert rects(chips) == [(0.0, 0.0, 8.0, 8.0)]


def test_enclose_small_image_spans_fully():
    comps = connected_components(mask_with([(2, 2)], shape=(6, 6)))
    chips = enclose_components(comps, 8, 6, 6, stride=1)
    assert rects(chips) == [(0.0, 0.0, 6.0, 6.0)]


def test_merge_pair():
    out = merge_chips([chip(0, 0, 10, 10), chip(5, 5, 10, 10, cid=1)])
    assert rects(out) == [(0.0, 0.0, 15.0, 15.0)]


def test_merge_cascades_to_fixed_point():
    out = merge_chips([chip(0, 0, 10, 10), chip(5, 5, 10, 10, cid=1), chip(14, 14, 6, 6, cid=2)])
    assert rects(out) == [(0.0, 0.0, 20.0, 20.0)]


def test_merge_keeps_disjoint_and_touching():
    out = merge_chips([chip(0, 0, 10, 10), chip(10, 0, 10, 10, cid=1)])
    assert rects(out) == [(0.0, 0.0, 10.0, 10.0), (10.0, 0.0, 10.0, 10.0)]


def test_merge_idempotent():
    rng = np.random.default_rng(6)
    for _ in range(50):
        chips = [
            chip(float(rng.uniform(0, 80)), float(rng.uniform(0, 80)), float(rng.uniform(1, 40)), float(rng.uniform(1, 40)), cid=i)
            for i in range(8)
        ]
        once = merge_chips(chips)
        twice = merge_chips(once)
        assert rects(once) == rects(twice)
        for a in range(len(once)):
            for b in range(a + 1, len(once)):
                ra, rb = once[a].rect, once[b].rect
                ix = min(ra.x2, rb.x2) - max(ra.x, rb.x)
                iy = min(ra.y2, rb.y2) - max(ra.y, rb.y)
                assert ix <= 0 or iy <= 0


def test_generate_all_zero_map():
    assert generate_chips(np.zeros((20, 20)), ChipParams(0.5, 3, 8), 20, 20, stride=1) == []


def test_generate_single_hot_cell():
    m = np.zeros((20, 20))
    m[10, 10] = 1.0
    out = generate_chips(m, ChipParams(0.5, 3, 8), 20, 20, stride=1)
    assert rects(out) == [(7.0, 7.0, 8.0, 8.0)]
    assert out[0].source_scale == 1 and out[0].id == 0


def test_generate_nearby_cells_fuse():
    m = np.zeros((20, 20))
    m[5, 5] = 1.0
    m[7, 7] = 1.0
    out = generate_chips(m, ChipParams(0.5, 3, 8), 20, 20, stride=1)
    assert len(out) == 1


def test_generate_dim_mismatch():
    with pytest.raises(ValueError):
        generate_chips(np.zeros((20, 20)), ChipParams(0.5, 3, 8), 30, 20, stride=1)


def test_binarize_monotone_in_threshold():
    rng = np.random.default_rng(7)
    m = rng.uniform(0, 1, (32, 32))
    prev = binarize(m, 0.1)
    for t in (0.3, 0.5, 0.7, 0.9):
        cur = binarize(m, t)
        assert not (cur & ~prev).any()
        prev = cur


def _random_map(rng, rows, cols):
    if rng.random() < 0.5:
        return rng.uniform(0, 1, (rows, cols))
    # blobby alternative: a few bright patches on a dark field
    m = rng.uniform(0, 0.3, (rows, cols))
    for _ in range(int(rng.integers(1, 4))):
        r = int(rng.integers(0, rows))
        c = int(rng.integers(0, cols))
        rr = slice(max(0, r - 2), min(rows, r + 3))
        cc = slice(max(0, c - 2), min(cols, c + 3))
        m[rr, cc] = rng.uniform(0.6, 1.0)
    return m


def test_reference_equivalence_random_maps():
    rng = np.random.default_rng(8)
    for _ in range(300):
        rows = int(rng.integers(4, 65))
        cols = int(rng.integers(4, 65))
        m = _random_map(rng, rows, cols)
        t = float(rng.uniform(0.05, 0.95))
        d = int(rng.choice([1, 3, 5]))
        k = int(rng.choice([4, 8, 16]))
        got = generate_chips(m, ChipParams(t, d, k), cols, rows, stride=1)
        want = reference_chips(m, t, d, k, cols, rows, stride=1)
        assert rects(got) == [tuple(map(float, r)) for r in want]


def test_reference_equivalence_with_stride():
    rng = np.random.default_rng(9)
    for _ in range(60):
        rows, cols = int(rng.integers(4, 33)), int(rng.integers(4, 33))
        m = _random_map(rng, rows, cols)
        image_w = cols * 16 - int(rng.integers(0, 16))
        image_h = rows * 16 - int(rng.integers(0, 16))
        got = generate_chips(m, ChipParams(0.5, 3, 100), image_w, image_h, stride=16)
        want = reference_chips(m, 0.5, 3, 100, image_w, image_h, stride=16)
        assert rects(got) == [tuple(map(float, r)) for r in want]


def test_every_hot_cell_inside_exactly_one_chip():
    rng = np.random.default_rng(10)
    for _ in range(100):
        rows, cols = int(rng.integers(8, 49)), int(rng.integers(8, 49))
        m = _random_map(rng, rows, cols)
        t = 0.5
        chips = generate_chips(m, ChipParams(t, 3, 8), cols, rows, stride=1)
        for r, c in map(tuple, np.argwhere(m > t)):
            holders = [
                ch
                for ch in chips
                if ch.rect.x <= c and ch.rect.x2 >= c + 1 and ch.rect.y <= r and ch.rect.y2 >= r + 1
            ]
            assert len(holders) == 1


def test_hot_cells_keep_dilation_margin():
    # positive cells stay (d-1)/2 cells away from interior chip borders
    rng = np.random.default_rng(11)
    for _ in range(100):
        rows = cols = 48
        m = _random_map(rng, rows, cols)
        for d in (3, 5):
            margin = (d - 1) // 2
            chips = generate_chips(m, ChipParams(0.5, d, 8), cols, rows, stride=1)
            for r, c in map(tuple, np.argwhere(m > 0.5)):
                holder = next(
                    ch for ch in chips if ch.rect.x <= c < ch.rect.x2 and ch.rect.y <= r < ch.rect.y2
                )
                if holder.rect.x > 0:
                    assert c - holder.rect.x >= margin
                if holder.rect.x2 < cols:
                    assert holder.rect.x2 - (c + 1) >= margin
                if holder.rect.y > 0:
                    assert r - holder.rect.y >= margin
                if holder.rect.y2 < rows:
                    assert holder.rect.y2 - (r + 1) >= margin
