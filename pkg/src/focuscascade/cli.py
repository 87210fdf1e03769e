"""Command-line surface tying the library together.

Subcommands:
  labels    ground-truth label map for one image -> FPM1 file
  chips     probability map (FPM1) -> chip list JSON
  stack     chip-local detections + chips -> merged original-space detections
  pipeline  run the oracle-backed cascade over an annotation file
  bound     best-case speedup vs minimum chip side k -> CSV
  recall    focus recall curves (cell level or chip level) -> CSV
  eval      average precision of detections against annotations -> CSV

Exit status: 0 on success, 2 on usage errors (argparse), 1 on domain errors
with a diagnostic naming the failing input. Identical invocations write
byte-identical files.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Sequence

import numpy as np

from .cascade import OracleDetector, OracleNoise, Scene, run_cascade
from .chips import ChipParams, FocusChip, generate_chips
from .fileio import (
    csv_text,
    read_annotations,
    read_chips,
    read_detections,
    read_fpm,
    write_chips,
    write_csv,
    write_detections,
    write_fpm,
    write_json,
)
from .geometry import (
    BoxPx,
    PyramidConfig,
    Space,
    resize_factor,
    resized_dims,
    round_half_up,
)
from .labeling import LabelParams, assign_labels
from .metrics import (
    DEFAULT_IOU_THRESHOLDS,
    average_precision,
    focuschip_recall,
    focuspixel_recall,
)
from .stacking import ChipCapture, StackParams, focus_stack

DEFAULT_SCALES = "480,512;800,1280;1400,2000"


def _parse_scales(text: str, stride: int) -> PyramidConfig:
    pairs = []
    for part in text.split(";"):
        bits = part.split(",")
        if len(bits) != 2:
            raise ValueError(f"bad --scales entry {part!r}, want 'min_side,max_side'")
        pairs.append((float(bits[0]), float(bits[1])))
    return PyramidConfig.from_pairs(pairs, stride=stride)


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _pick_scene(scenes: list[Scene], image_id: str | None, path: str) -> Scene:
    if image_id is None:
        if not scenes:
            raise ValueError(f"{path}: no images")
        return scenes[0]
    for s in scenes:
        if str(s.image_id) == str(image_id):
            return s
    raise ValueError(f"{path}: no image with id {image_id}")


def _scaled_gt_boxes(scene: Scene, zoom: float, frame_w: int, frame_h: int) -> list[BoxPx]:
    """Ground-truth boxes scaled into a frame, clipped to its rounded dims."""
    eps = 1e-6
    space = Space.chip(None)
    boxes = []
    for obj in scene.objects:
        b = obj.box
        x = min(b.x * zoom, frame_w - eps)
        y = min(b.y * zoom, frame_h - eps)
        boxes.append(BoxPx(x, y, min(b.w * zoom, frame_w - x), min(b.h * zoom, frame_h - y), space))
    return boxes


def _cmd_labels(args: argparse.Namespace) -> int:
    scenes = read_annotations(args.annotations)
    scene = _pick_scene(scenes, args.image_id, args.annotations)
    frame_w = max(1, round_half_up(scene.width * args.zoom))
    frame_h = max(1, round_half_up(scene.height * args.zoom))
    params = LabelParams(args.stride, args.a, args.b, args.c)
    boxes = _scaled_gt_boxes(scene, args.zoom, frame_w, frame_h)
    labels = assign_labels(boxes, frame_w, frame_h, params)
    write_fpm(args.out, labels.astype(np.float32))
    return 0


def _cmd_chips(args: argparse.Namespace) -> int:
    grid = read_fpm(args.probmap).astype(np.float64)
    rows, cols = grid.shape
    image_w = args.image_w if args.image_w is not None else cols * args.stride
    image_h = args.image_h if args.image_h is not None else rows * args.stride
    params = ChipParams(args.t, args.d, args.k)
    try:
        chips = generate_chips(grid, params, image_w, image_h, args.stride, source_scale=args.scale_index)
    except ValueError as e:
        raise ValueError(f"{args.probmap}: {e}") from None
    write_chips(args.out, [(args.image_id, c) for c in chips])
    return 0


def _scene_by_id(scenes: list[Scene]) -> dict[str, Scene]:
    return {str(s.image_id): s for s in scenes}


def _stack_one_image(
    scene: Scene,
    groups: dict[int | str | None, list],
    chips_by_id: dict[int, FocusChip],
    config: PyramidConfig,
    params: StackParams,
) -> list:
    zooms = {s.index: resize_factor(s, scene.width, scene.height) for s in config.scales}
    sdims = {s.index: resized_dims(s, scene.width, scene.height) for s in config.scales}
    positions = {s.index: i for i, s in enumerate(config.scales)}
    captures = []
    for chip_id, dets in groups.items():
        for det in dets:
            if det.box.space.kind != "chip":
                raise ValueError(f"stack expects chip-local detections, got space {det.box.space}")
        if chip_id is None:
            scale_idx = next((d.scale_index for d in dets if d.scale_index is not None), config.scales[0].index)
            if scale_idx not in zooms:
                raise ValueError(f"detection names unknown scale index {scale_idx}")
            sw, sh = sdims[scale_idx]
            chip = FocusChip(BoxPx(0.0, 0.0, float(sw), float(sh), Space.scaled(scale_idx)), scale_idx, -1)
            zoom = zooms[scale_idx]
            origin_x = origin_y = 0.0
            frame_w = max(1, round_half_up(scene.width * zoom))
            frame_h = max(1, round_half_up(scene.height * zoom))
        else:
            if chip_id not in chips_by_id:
                raise ValueError(f"detections reference chip {chip_id} missing from the chips file")
            chip = chips_by_id[chip_id]
            src = chip.source_scale
            if src not in positions:
                raise ValueError(f"chip {chip_id} names unknown scale index {src}")
            pos = positions[src]
            if pos + 1 >= len(config.scales):
                raise ValueError(f"chip {chip_id} was produced at the finest scale, nothing processes it")
            scale_idx = config.scales[pos + 1].index
            z_src = zooms[src]
            zoom = zooms[scale_idx]
            # mirror the cascade: back-projected regions are clipped to the image
            origin_x = max(0.0, chip.rect.x / z_src)
            origin_y = max(0.0, chip.rect.y / z_src)
            region_w = min(float(scene.width), chip.rect.x2 / z_src) - origin_x
            region_h = min(float(scene.height), chip.rect.y2 / z_src) - origin_y
            frame_w = max(1, round_half_up(region_w * zoom))
            frame_h = max(1, round_half_up(region_h * zoom))
            sw, sh = sdims[src]
        for det in dets:
            if det.scale_index is not None and det.scale_index != scale_idx:
                raise ValueError(
                    f"detection scale index {det.scale_index} disagrees with chip {chip_id} (expected {scale_idx})"
                )
        captures.append(
            ChipCapture(
                chip=chip,
                scale_index=scale_idx,
                zoom=zoom,
                origin_x=origin_x,
                origin_y=origin_y,
                frame_w=float(frame_w),
                frame_h=float(frame_h),
                scaled_w=float(sw),
                scaled_h=float(sh),
                detections=tuple(replace(d, scale_index=scale_idx) for d in dets),
            )
        )
    return focus_stack(captures, config, params)


def _cmd_stack(args: argparse.Namespace) -> int:
    config = _parse_scales(args.scales, args.stride)
    by_id = _scene_by_id(read_annotations(args.annotations))
    det_entries = read_detections(args.detections)
    chip_entries = read_chips(args.chips)
    params = StackParams(sigma=args.sigma)

    chips_by_image: dict[str, dict[int, FocusChip]] = {}
    for iid, chip in chip_entries:
        chips_by_image.setdefault(str(iid), {})[chip.id] = chip
    groups_by_image: dict[str, dict[int | str | None, list]] = {}
    image_order: list[str] = []
    for iid, det in det_entries:
        key = str(iid)
        if key not in by_id:
            raise ValueError(f"{args.detections}: unknown image id {iid}")
        if key not in groups_by_image:
            groups_by_image[key] = {}
            image_order.append(key)
        groups_by_image[key].setdefault(det.chip_id, []).append(det)

    out = []
    for key in image_order:
        finals = _stack_one_image(
            by_id[key], groups_by_image[key], chips_by_image.get(key, {}), config, params
        )
        out.extend((by_id[key].image_id, d) for d in finals)
    write_detections(args.out, out)
    return 0


def _aggregate_report(reports: list[tuple[int | str, dict]]) -> dict:
    per_scale: dict[int, dict] = {}
    baseline = raw = padded = 0
    for _, rep in reports:
        baseline += rep["baseline_pixels"]
        raw += rep["total_raw_pixels"]
        padded += rep["total_padded_pixels"]
        for row in rep["per_scale"]:
            agg = per_scale.setdefault(
                row["scale_index"],
                {"scale_index": row["scale_index"], "chip_count": 0, "raw_pixels": 0, "padded_pixels": 0},
            )
            agg["chip_count"] += row["chip_count"]
            agg["raw_pixels"] += row["raw_pixels"]
            agg["padded_pixels"] += row["padded_pixels"]
    return {
        "per_scale": [per_scale[k] for k in sorted(per_scale)],
        "baseline_pixels": baseline,
        "total_raw_pixels": raw,
        "total_padded_pixels": padded,
        "speedup": baseline / raw if raw else 0.0,
    }


def _cmd_pipeline(args: argparse.Namespace) -> int:
    config = _parse_scales(args.scales, args.stride)
    scenes = read_annotations(args.annotations)
    label_params = LabelParams(args.stride, args.a, args.b, args.c)
    chip_params = ChipParams(args.t, args.d, args.k)
    stack_params = StackParams(sigma=args.sigma)
    noise = OracleNoise(args.miss_rate, args.fp_rate, args.jitter, args.map_noise, args.seed)
    detector = OracleDetector(noise, label_params)

    det_out = []
    chip_out = []
    reports = []
    for scene in scenes:
        result = run_cascade(scene, detector, config, chip_params, stack_params)
        det_out.extend((scene.image_id, d) for d in result.detections)
        for scale_index in sorted(result.chips):
            chip_out.extend((scene.image_id, c) for c in result.chips[scale_index])
        reports.append((scene.image_id, result.report.to_dict()))

    write_detections(args.out_detections, det_out)
    if args.out_chips:
        write_chips(args.out_chips, chip_out)
    if args.out_report:
        write_json(
            args.out_report,
            {
                "images": [{"image_id": iid, **rep} for iid, rep in reports],
                "aggregate": _aggregate_report(reports),
            },
        )
    return 0


def _cmd_bound(args: argparse.Namespace) -> int:
    config = _parse_scales(args.scales, args.stride)
    scenes = read_annotations(args.annotations)
    label_params = LabelParams(args.stride, args.a, args.b, args.c)
    detector = OracleDetector(OracleNoise(), label_params)
    ks = _parse_ints(args.k)
    if not ks:
        raise ValueError("--k needs at least one value")
    rows = []
    for k in ks:
        baseline = raw = 0
        for scene in scenes:
            report = run_cascade(scene, detector, config, ChipParams(args.t, args.d, k)).report
            baseline += report.baseline_pixels
            raw += report.total_raw_pixels
        rows.append((k, baseline / raw if raw else 0.0))
    return _emit_csv(args.out, ["k", "speedup"], rows)


def _cmd_recall(args: argparse.Namespace) -> int:
    if args.probmap:
        if not args.labels:
            raise ValueError("cell-level recall needs --labels next to --probmap")
        pred = read_fpm(args.probmap).astype(np.float64)
        labels = read_fpm(args.labels)
        rows = []
        for t in _parse_floats(args.t):
            recall, ratio = focuspixel_recall(pred, labels, t)
            rows.append((t, ratio, recall))
        return _emit_csv(args.out, ["param", "area_ratio", "recall"], rows)
    if args.chips:
        if not args.annotations:
            raise ValueError("chip-level recall needs --annotations next to --chips")
        config = _parse_scales(args.scales, args.stride)
        by_id = _scene_by_id(read_annotations(args.annotations))
        chips_by_image: dict[str, list[FocusChip]] = {}
        for iid, chip in read_chips(args.chips):
            key = str(iid)
            if key not in by_id:
                raise ValueError(f"{args.chips}: unknown image id {iid}")
            chips_by_image.setdefault(key, []).append(chip)
        total_gt = enclosed = 0
        chip_area = image_area = 0.0
        for key, scene in by_id.items():
            zooms = {s.index: resize_factor(s, scene.width, scene.height) for s in config.scales}
            original = []
            for chip in chips_by_image.get(key, []):
                if chip.source_scale not in zooms:
                    raise ValueError(f"{args.chips}: chip {chip.id} names unknown scale {chip.source_scale}")
                z = zooms[chip.source_scale]
                r = chip.rect
                original.append(
                    FocusChip(BoxPx(r.x / z, r.y / z, r.w / z, r.h / z, Space.original()), chip.source_scale, chip.id)
                )
            gts = [o.box for o in scene.objects]
            recall, ratio = focuschip_recall(original, gts, scene.width, scene.height)
            enclosed += round(recall * len(gts))
            total_gt += len(gts)
            chip_area += ratio * scene.width * scene.height
            image_area += scene.width * scene.height
        recall = 1.0 if total_gt == 0 else enclosed / total_gt
        ratio = chip_area / image_area if image_area else 0.0
        return _emit_csv(args.out, ["param", "area_ratio", "recall"], [(args.param, ratio, recall)])
    raise ValueError("recall needs either --probmap with --labels, or --chips with --annotations")


def _cmd_eval(args: argparse.Namespace) -> int:
    scenes = read_annotations(args.annotations)
    det_entries = read_detections(args.detections)
    thresholds = _parse_floats(args.iou) if args.iou else list(DEFAULT_IOU_THRESHOLDS)

    # matching must stay within one image: shift every image into its own
    # disjoint coordinate band so cross-image IoU is always zero while the
    # global score ranking is preserved
    offsets = {str(s.image_id): i * 1e8 for i, s in enumerate(scenes)}
    gts = []
    for i, scene in enumerate(scenes):
        for obj in scene.objects:
            b = obj.box
            gts.append((BoxPx(b.x + i * 1e8, b.y, b.w, b.h, b.space), obj.category))
    dets = []
    for iid, det in det_entries:
        key = str(iid)
        if key not in offsets:
            raise ValueError(f"{args.detections}: unknown image id {iid}")
        if det.box.space.kind != "original":
            raise ValueError(f"{args.detections}: eval needs original-space detections, got {det.box.space}")
        dets.append(replace(det, box=replace(det.box, x=det.box.x + offsets[key])))

    result = average_precision(dets, gts, thresholds)
    rows: list[tuple[object, float]] = [(f"{thr:g}", ap) for thr, ap in result.per_threshold]
    rows.append(("mean", result.mean_ap))
    return _emit_csv(args.out, ["iou", "ap"], rows)


def _emit_csv(out: str | None, header: list[str], rows: list) -> int:
    if out:
        write_csv(out, header, rows)
    else:
        sys.stdout.write(csv_text(header, rows))
    return 0


def _add_band_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=float, default=5.0, help="smallest object size treated as in-focus (sqrt area, px)")
    p.add_argument("--b", type=float, default=64.0, help="largest in-focus object size (sqrt area, px)")
    p.add_argument("--c", type=float, default=90.0, help="upper edge of the uncertain size band (sqrt area, px)")


def _add_scales_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scales", default=DEFAULT_SCALES, help="semicolon-separated min_side,max_side pairs, coarse to fine")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="focuscascade", description="Coarse-to-fine detection cascade tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("labels", help="write a ground-truth label map as FPM1")
    p.add_argument("--annotations", required=True)
    p.add_argument("--image-id", default=None)
    p.add_argument("--zoom", type=float, default=1.0)
    p.add_argument("--stride", type=int, default=16)
    _add_band_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_labels)

    p = sub.add_parser("chips", help="cut chips from a probability map")
    p.add_argument("--probmap", required=True)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--k", type=int, default=512)
    p.add_argument("--stride", type=int, default=16)
    p.add_argument("--image-w", type=int, default=None)
    p.add_argument("--image-h", type=int, default=None)
    p.add_argument("--image-id", default=0)
    p.add_argument("--scale-index", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_chips)

    p = sub.add_parser("stack", help="merge chip-local detections into original-space output")
    p.add_argument("--detections", required=True)
    p.add_argument("--chips", required=True)
    p.add_argument("--annotations", required=True)
    _add_scales_flag(p)
    p.add_argument("--stride", type=int, default=16)
    p.add_argument("--sigma", type=float, default=0.55)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stack)

    p = sub.add_parser("pipeline", help="run the oracle-backed cascade over an annotation file")
    p.add_argument("--annotations", required=True)
    _add_scales_flag(p)
    p.add_argument("--stride", type=int, default=16)
    _add_band_flags(p)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--k", type=int, default=512)
    p.add_argument("--sigma", type=float, default=0.55)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--miss-rate", type=float, default=0.0)
    p.add_argument("--fp-rate", type=float, default=0.0, help="expected false positives per chip megapixel")
    p.add_argument("--jitter", type=float, default=0.0, help="box position jitter in chip px")
    p.add_argument("--map-noise", type=float, default=0.0, help="stddev of probability-map noise")
    p.add_argument("--out-detections", required=True)
    p.add_argument("--out-chips", default=None)
    p.add_argument("--out-report", default=None)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("bound", help="best-case speedup for each minimum chip side k")
    p.add_argument("--annotations", required=True)
    p.add_argument("--k", default="64,128,256,512", help="comma-separated k values")
    _add_scales_flag(p)
    p.add_argument("--stride", type=int, default=16)
    _add_band_flags(p)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("recall", help="recall curves at cell level (--probmap) or chip level (--chips)")
    p.add_argument("--probmap", default=None)
    p.add_argument("--labels", default=None)
    p.add_argument("--t", default="0.5", help="comma-separated thresholds for cell-level recall")
    p.add_argument("--chips", default=None)
    p.add_argument("--annotations", default=None)
    p.add_argument("--param", type=float, default=0.0, help="swept value recorded with chip-level rows")
    _add_scales_flag(p)
    p.add_argument("--stride", type=int, default=16)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_recall)

    p = sub.add_parser("eval", help="average precision of detections against annotations")
    p.add_argument("--detections", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--iou", default=None, help="comma-separated IoU thresholds (default 0.5:0.05:0.95)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_eval)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
