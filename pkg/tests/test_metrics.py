import math

import numpy as np
import pytest

from focuscascade import (
    DEFAULT_IOU_THRESHOLDS,
    BoxPx,
    Detection,
    FocusChip,
    LabelParams,
    POSITIVE,
    PyramidConfig,
    Scene,
    SceneObject,
    Space,
    assign_labels,
    average_precision,
    confident_subset,
    focuschip_recall,
    focuspixel_recall,
    speedup_bound,
)

from _reference import reference_ap

ORIG = Space.original()


def det(x, y, w, h, score, category=1):
    return Detection(BoxPx(float(x), float(y), float(w), float(h), ORIG), score, category)


def gt(x, y, w, h):
    return BoxPx(float(x), float(y), float(w), float(h), ORIG)


def test_default_iou_grid():
    assert DEFAULT_IOU_THRESHOLDS == (0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)


def test_focuspixel_recall_conventions():
    labels = np.array([[1, 0], [1, -1]], dtype=np.int8)
    perfect = (labels == POSITIVE).astype(np.float64)
    recall, ratio = focuspixel_recall(perfect, labels, 0.5)
    assert recall == 1.0
    assert ratio == 0.5  # 2 of 4 cells fire
    recall, ratio = focuspixel_recall(np.zeros((2, 2)), labels, 0.5)
    assert recall == 0.0 and ratio == 0.0
    recall, _ = focuspixel_recall(np.zeros((2, 2)), np.zeros((2, 2), dtype=np.int8), 0.5)
    assert recall == 1.0  # nothing to recall
    with pytest.raises(ValueError):
        focuspixel_recall(np.zeros((2, 3)), labels, 0.5)


def test_focuspixel_recall_partial():
    labels = np.full((2, 2), 1, dtype=np.int8)
    pred = np.array([[0.9, 0.9], [0.9, 0.1]])
    recall, ratio = focuspixel_recall(pred, labels, 0.5)
    assert recall == 0.75 and ratio == 0.75


def test_confident_subset_strict_thresholds():
    gts = [gt(10, 10, 40, 40)]
    exact = det(10, 10, 40, 40, 0.9)
    assert confident_subset(gts, [exact]) == gts
    shifted = det(40, 10, 40, 40, 0.9)  # iou = 10/70 < 0.5
    assert confident_subset(gts, [shifted]) == []
    at_score_floor = det(10, 10, 40, 40, 0.5)  # score must be strictly above 0.5
    assert confident_subset(gts, [at_score_floor]) == []
    taller = det(10, 10, 40, 60, 0.51)  # iou vs the 40x40 box is 2/3 > 0.5
    assert confident_subset(gts, [taller]) == gts


def test_focuschip_recall_enclosure():
    whole = [FocusChip(BoxPx(0.0, 0.0, 200.0, 200.0, Space.scaled(1)), 1, 0)]
    recall, ratio = focuschip_recall(whole, [gt(10, 10, 50, 50)], 200, 200)
    assert recall == 1.0 and ratio == 1.0
    half = [FocusChip(BoxPx(0.0, 0.0, 100.0, 200.0, Space.scaled(1)), 1, 0)]
    recall, ratio = focuschip_recall(half, [gt(80, 10, 50, 50)], 200, 200)
    assert recall == 0.0 and ratio == 0.5  # straddling a chip border does not count
    recall, ratio = focuschip_recall([], [gt(10, 10, 50, 50)], 200, 200)
    assert recall == 0.0 and ratio == 0.0
    recall, _ = focuschip_recall(whole, [], 200, 200)
    assert recall == 1.0


def ap_at(result, thr):
    return dict(result.per_threshold)[thr]


def test_average_precision_perfect():
    gts = [(gt(10, 10, 40, 40), 1), (gt(100, 100, 30, 30), 1)]
    dets = [det(10, 10, 40, 40, 1.0), det(100, 100, 30, 30, 1.0)]
    result = average_precision(dets, gts)
    assert result.mean_ap == 1.0
    assert all(ap == 1.0 for _, ap in result.per_threshold)


def test_average_precision_no_detections():
    result = average_precision([], [(gt(10, 10, 40, 40), 1)])
    assert result.mean_ap == 0.0


def test_average_precision_fp_before_tp():
    gts = [(gt(10, 10, 40, 40), 1)]
    dets = [det(200, 200, 40, 40, 0.9), det(10, 10, 40, 40, 0.8)]
    result = average_precision(dets, gts, iou_thresholds=(0.5,))
    # ranks: FP then TP; every recall level's best precision is 1/2
    assert abs(ap_at(result, 0.5) - 0.5) < 1e-9


def test_average_precision_macro_over_categories():
    gts = [(gt(10, 10, 40, 40), 1), (gt(100, 100, 40, 40), 2)]
    dets = [det(10, 10, 40, 40, 0.9, category=1)]  # category 2 never found
    result = average_precision(dets, gts, iou_thresholds=(0.5,))
    assert ap_at(result, 0.5) == 0.5


def test_average_precision_matches_reference():
    rng = np.random.default_rng(31)
    for _ in range(100):
        n_gt = int(rng.integers(1, 6))
        gts = [
            gt(float(rng.integers(0, 150)), float(rng.integers(0, 150)), float(rng.integers(10, 50)), float(rng.integers(10, 50)))
            for _ in range(n_gt)
        ]
        dets = []
        for g in gts:
            if rng.uniform() < 0.8:
                dx, dy = rng.uniform(-10, 10, size=2)
                dets.append(det(g.x + dx, g.y + dy, g.w, g.h, float(rng.uniform(0.1, 1.0))))
        for _ in range(int(rng.integers(0, 4))):
            dets.append(det(float(rng.integers(0, 150)), float(rng.integers(0, 150)), 20, 20, float(rng.uniform(0.1, 1.0))))
        for thr in (0.5, 0.75):
            got = ap_at(average_precision(dets, [(g, 1) for g in gts], iou_thresholds=(thr,)), thr)
            want = reference_ap([(d.box.as_tuple(), d.score) for d in dets], [g.as_tuple() for g in gts], thr)
            assert abs(got - want) < 1e-9


def test_speedup_bound_hand_example():
    scene = Scene(
        image_id=0,
        width=500,
        height=500,
        objects=(SceneObject(gt(200, 200, 8, 8), 1),),
    )
    config = PyramidConfig.from_pairs([(500, 500), (1000, 1000)])
    curve = speedup_bound(scene, config, ks=(128,))
    (k, speedup), = curve
    assert k == 128
    assert abs(speedup - 1250000 / 266384) < 1e-12


def test_speedup_bound_empty_scene():
    scene = Scene(image_id=0, width=500, height=500, objects=())
    config = PyramidConfig.from_pairs([(500, 500), (1000, 1000)])
    (_, speedup), = speedup_bound(scene, config, ks=(128,))
    assert speedup == 1250000 / 250000


def test_speedup_bound_non_increasing_in_k():
    rng = np.random.default_rng(32)
    config = PyramidConfig.from_pairs([(480, 512), (800, 1280), (1400, 2000)])
    for trial in range(5):
        objects = []
        for _ in range(int(rng.integers(1, 4))):
            s = int(rng.integers(40, 90))
            x = int(rng.integers(0, 900 - s))
            y = int(rng.integers(0, 700 - s))
            objects.append(SceneObject(gt(x, y, s, s), 1))
        scene = Scene(image_id=trial, width=900, height=700, objects=tuple(objects))
        curve = speedup_bound(scene, config, ks=(64, 128, 256, 512))
        values = [s for _, s in curve]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
        assert all(s >= 1.0 for s in values)
