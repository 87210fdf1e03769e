import math

import numpy as np
import pytest

from focuscascade import (
    BoxPx,
    INVALID,
    LabelParams,
    NEGATIVE,
    POSITIVE,
    Space,
    SpaceMismatchError,
    assign_labels,
    label_map_dims,
    label_stats,
)

from _reference import reference_label_map

CHIP = Space.chip(None)


def cbox(x, y, w, h):
    return BoxPx(x, y, w, h, CHIP)


def test_label_map_dims():
    assert label_map_dims(512, 512, 16) == (32, 32)
    assert label_map_dims(513, 512, 16) == (33, 32)
    assert label_map_dims(5, 5, 16) == (1, 1)


def test_single_medium_box_marks_nine_cells():
    # pixels [100, 130) touch cells 6..8 on both axes
    labels = assign_labels([cbox(100, 100, 30, 30)], 512, 512, LabelParams())
    assert labels.shape == (32, 32)
    pos = np.argwhere(labels == POSITIVE)
    assert sorted(map(tuple, pos)) == [(r, c) for r in (6, 7, 8) for c in (6, 7, 8)]
    assert (labels != NEGATIVE).sum() == 9


def test_tiny_box_marks_invalid():
    labels = assign_labels([cbox(100, 100, 3, 3)], 512, 512, LabelParams())
    assert labels[6, 6] == INVALID
    assert (labels == INVALID).sum() == 1
    assert (labels == POSITIVE).sum() == 0


def test_positive_precedence_over_invalid():
    # one in-focus box and one uncertain-band box share cells
    small = cbox(100, 100, 30, 30)
    big = cbox(90, 90, 80, 80)
    assert math.sqrt(big.w * big.h) == 80
    labels = assign_labels([small, big], 512, 512, LabelParams())
    assert labels[6, 6] == POSITIVE
    assert labels[5, 5] == INVALID


def test_empty_scene_all_zero():
    labels = assign_labels([], 512, 512, LabelParams())
    assert (labels == NEGATIVE).all()


def test_band_edges():
    params = LabelParams()
    at = lambda size: assign_labels([cbox(10, 10, size, size)], 256, 256, params)[0, 0]
    assert at(5.0) == POSITIVE
    assert at(64.0) == POSITIVE
    assert at(4.999) == INVALID
    assert at(64.001) == INVALID
    assert at(89.999) == INVALID
    assert at(90.0) == NEGATIVE
    assert at(150.0) == NEGATIVE


def test_wrong_space_rejected():
    with pytest.raises(SpaceMismatchError):
        assign_labels([BoxPx(0, 0, 10, 10, Space.original())], 64, 64, LabelParams())


def test_box_outside_frame_rejected():
    with pytest.raises(ValueError):
        assign_labels([cbox(60, 0, 10, 10)], 64, 64, LabelParams())


def test_params_validation():
    with pytest.raises(ValueError):
        LabelParams(16, 64, 5, 90)
    with pytest.raises(ValueError):
        LabelParams(0, 5, 64, 90)


def _random_boxes(rng, frame_w, frame_h, n):
    boxes = []
    for _ in range(n):
        size = float(rng.uniform(1.0, 120.0))
        aspect = float(rng.uniform(0.5, 2.0))
        w = min(max(size * math.sqrt(aspect), 0.5), frame_w)
        h = min(max(size / math.sqrt(aspect), 0.5), frame_h)
        x = float(rng.uniform(0, frame_w - w))
        y = float(rng.uniform(0, frame_h - h))
        boxes.append((x, y, w, h))
    return boxes


def test_oracle_equivalence_random_scenes():
    rng = np.random.default_rng(3)
    params = LabelParams()
    for _ in range(300):
        frame_w = int(rng.integers(16, 257))
        frame_h = int(rng.integers(16, 257))
        raw = _random_boxes(rng, frame_w, frame_h, int(rng.integers(0, 11)))
        got = assign_labels([cbox(*b) for b in raw], frame_w, frame_h, params)
        want = reference_label_map(raw, frame_w, frame_h, params.stride)
        assert np.array_equal(got, want)


def test_oracle_equivalence_under_scaling():
    # shrinking a scene moves boxes across the size bands; both routes agree
    rng = np.random.default_rng(4)
    params = LabelParams()
    for _ in range(100):
        raw = _random_boxes(rng, 512, 512, 5)
        for zoom in (0.25, 0.5, 2.0):
            scaled = [(x * zoom, y * zoom, w * zoom, h * zoom) for x, y, w, h in raw]
            fw, fh = int(512 * zoom), int(512 * zoom)
            got = assign_labels([cbox(*b) for b in scaled], fw, fh, params)
            want = reference_label_map(scaled, fw, fh, params.stride)
            assert np.array_equal(got, want)


def test_adding_box_never_clears_positive():
    rng = np.random.default_rng(5)
    params = LabelParams()
    for _ in range(100):
        base = _random_boxes(rng, 256, 256, 4)
        extra = _random_boxes(rng, 256, 256, 1)
        before = assign_labels([cbox(*b) for b in base], 256, 256, params)
        after = assign_labels([cbox(*b) for b in base + extra], 256, 256, params)
        assert (after[before == POSITIVE] == POSITIVE).all()


def test_label_stats():
    zero = assign_labels([], 64, 64, LabelParams())
    s = label_stats(zero)
    assert (s.positive, s.negative, s.invalid) == (0, 16, 0)
    assert s.total == 16

    labels = assign_labels([cbox(100, 100, 30, 30)], 512, 512, LabelParams())
    s = label_stats(labels)
    assert (s.positive, s.negative, s.invalid) == (9, 1015, 0)

    one = assign_labels([cbox(0, 0, 16, 16)], 16, 16, LabelParams())
    s = label_stats(one)
    assert s.positive == 1 and s.negative == 0
    assert s.positive_negative_ratio == math.inf
