"""Coarse-to-fine cascade driver plus the synthetic oracle used to verify it.

Scale 1 always processes the full image. The probability maps predicted at
scale i are stitched onto that scale's full canvas, chips are cut from the
stitched map, and scale i+1 processes only those chips (cropped from the
original image, resized with scale i+1's zoom). A scale without chips stops
the cascade. Focus stacking merges the per-region detections, and a
PixelReport accounts for every pixel that was (or would have been) processed.

The oracle detector answers detection requests straight from ground truth,
optionally corrupted by a seeded noise model, so the whole cascade can be
verified end to end without any learned model.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, field, replace
from typing import Protocol, Sequence

import numpy as np

from .chips import ChipParams, FocusChip, generate_chips
from .geometry import (
    BoxPx,
    Detection,
    PyramidConfig,
    Space,
    intersection_area,
    resize_factor,
    round_half_up,
)
from .labeling import POSITIVE, LabelParams, assign_labels
from .stacking import ChipCapture, StackParams, focus_stack

__all__ = [
    "Scene",
    "SceneObject",
    "SceneSpec",
    "OracleNoise",
    "Detector",
    "OracleDetector",
    "DetectorContractError",
    "InfeasibleSceneError",
    "ChipBatch",
    "ScalePixels",
    "PixelReport",
    "CascadeResult",
    "synth_scene",
    "oracle_detect",
    "stitch_focus_maps",
    "group_chips",
    "padded_pixels",
    "run_cascade",
    "run_full_pyramid",
]


class DetectorContractError(ValueError):
    """A detector returned a probability map with the wrong dimensions."""


class InfeasibleSceneError(ValueError):
    """A scene spec asks for more or larger objects than the image can hold."""


@dataclass(frozen=True)
class SceneObject:
    """One ground-truth object: original-space box plus its category id."""

    box: BoxPx
    category: int

    def __post_init__(self) -> None:
        if self.box.space.kind != "original":
            raise ValueError("scene objects live in original-image space")


@dataclass(frozen=True)
class Scene:
    """A synthetic or ingested image: dims, id, and ground-truth objects."""

    image_id: int | str
    width: int
    height: int
    objects: tuple[SceneObject, ...] = ()

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("scene dims must be >= 1")
        eps = 1e-6
        for obj in self.objects:
            b = obj.box
            if b.x < -eps or b.y < -eps or b.x2 > self.width + eps or b.y2 > self.height + eps:
                raise ValueError(f"object {b.as_tuple()} outside {self.width}x{self.height} scene")

    @property
    def categories(self) -> tuple[int, ...]:
        return tuple(sorted({o.category for o in self.objects}))


@dataclass(frozen=True)
class SceneSpec:
    """Recipe for synth_scene: image dims and per-size-class object counts.

    Size classes are bands on sqrt(area) in original px; every generated
    object's size lands inside its class band.
    """

    width: int
    height: int
    n_small: int = 0
    n_medium: int = 0
    n_large: int = 0
    small_band: tuple[float, float] = (16.0, 64.0)
    medium_band: tuple[float, float] = (64.0, 128.0)
    large_band: tuple[float, float] = (128.0, 256.0)
    categories: int = 1

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("scene dims must be >= 1")
        if min(self.n_small, self.n_medium, self.n_large) < 0 or self.categories < 1:
            raise ValueError("counts must be >= 0 and categories >= 1")
        for lo, hi in (self.small_band, self.medium_band, self.large_band):
            if not (0 < lo < hi):
                raise ValueError("size bands need 0 < lo < hi")

    def classes(self) -> tuple[tuple[str, int, tuple[float, float]], ...]:
        return (
            ("small", self.n_small, self.small_band),
            ("medium", self.n_medium, self.medium_band),
            ("large", self.n_large, self.large_band),
        )


def synth_scene(spec: SceneSpec, seed: int) -> Scene:
    """Generate a deterministic random scene from a SceneSpec recipe.

    Object boxes use integer coordinates and sizes; sqrt(w*h) always lands in
    the requested class band. Raises InfeasibleSceneError when objects cannot
    fit (a band wider than the image, or expected total area above half the
    image).
    """
    expected_area = 0.0
    for _, count, (lo, hi) in spec.classes():
        if count == 0:
            continue
        if hi > min(spec.width, spec.height):
            raise InfeasibleSceneError(f"band up to {hi} cannot fit a {spec.width}x{spec.height} image")
        expected_area += count * (hi**3 - lo**3) / (3.0 * (hi - lo))
    if expected_area > 0.5 * spec.width * spec.height:
        raise InfeasibleSceneError("requested objects would cover more than half the image")

    rng = np.random.default_rng(seed)
    objects = []
    for _, count, (lo, hi) in spec.classes():
        for _ in range(count):
            w = h = 0
            for _ in range(100):
                size = rng.uniform(lo, hi)
                aspect = rng.uniform(0.6, 1.0 / 0.6)
                w = max(1, round_half_up(size * math.sqrt(aspect)))
                h = max(1, round_half_up(size / math.sqrt(aspect)))
                if lo <= math.sqrt(w * h) <= hi and w <= spec.width and h <= spec.height:
                    break
            else:
                w = h = max(1, round_half_up((lo + hi) / 2.0))
            x = int(rng.integers(0, spec.width - w + 1))
            y = int(rng.integers(0, spec.height - h + 1))
            category = int(rng.integers(1, spec.categories + 1))
            objects.append(SceneObject(BoxPx(float(x), float(y), float(w), float(h), Space.original()), category))
    return Scene(image_id=seed, width=spec.width, height=spec.height, objects=tuple(objects))


@dataclass(frozen=True)
class OracleNoise:
    """Noise model for the oracle detector; all-zero means noise-free.

    miss_rate: probability of dropping each ground-truth detection.
    false_positive_rate: expected spurious detections per chip-local megapixel.
    jitter_px: uniform +-jitter applied to box positions (chip-local px).
    map_noise_sd: stddev of additive Gaussian noise on the probability map.
    seed: base seed; every (image, region, zoom) derives its own stream.
    """

    miss_rate: float = 0.0
    false_positive_rate: float = 0.0
    jitter_px: float = 0.0
    map_noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.miss_rate <= 1.0):
            raise ValueError("miss_rate must lie in [0, 1]")
        if self.false_positive_rate < 0 or self.jitter_px < 0 or self.map_noise_sd < 0:
            raise ValueError("noise magnitudes must be >= 0")

    @property
    def active(self) -> bool:
        return any(v > 0 for v in (self.miss_rate, self.false_positive_rate, self.jitter_px, self.map_noise_sd))


class Detector(Protocol):
    """Anything that can detect inside a region of an image.

    detect() receives the scene (or any image reference the implementation
    understands), the region to look at in original-image px, the zoom the
    region is resized with, and the feature stride. It returns chip-local
    detections (the cascade assigns chip ids and scale indices afterwards)
    and a probability map of shape ceil(frame/stride) for the resized region.
    Implementations must be deterministic for a fixed seed.
    """

    def detect(
        self, scene: object, region: BoxPx, zoom: float, stride: int
    ) -> tuple[list[Detection], np.ndarray]: ...


def _frame_dims(region: BoxPx, zoom: float) -> tuple[int, int]:
    return max(1, round_half_up(region.w * zoom)), max(1, round_half_up(region.h * zoom))


def _float_bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def _region_rng(noise: OracleNoise, image_id: int | str, region: BoxPx, zoom: float) -> np.random.Generator:
    key = [
        noise.seed & 0xFFFFFFFF,
        zlib.crc32(str(image_id).encode("utf-8")),
        _float_bits(region.x) & 0xFFFFFFFF,
        _float_bits(region.y) & 0xFFFFFFFF,
        _float_bits(region.w) & 0xFFFFFFFF,
        _float_bits(region.h) & 0xFFFFFFFF,
        _float_bits(zoom) & 0xFFFFFFFF,
    ]
    return np.random.default_rng(key)


def oracle_detect(
    scene: Scene,
    region: BoxPx,
    zoom: float,
    stride: int,
    noise: OracleNoise | None = None,
    label_params: LabelParams | None = None,
) -> tuple[list[Detection], np.ndarray]:
    """Answer a detection request straight from ground truth.

    Noise-free: the detections are exactly the ground-truth boxes with
    positive overlap against the region, clipped to it, expressed chip-local
    at the given zoom, each with score 1.0; the probability map is exactly
    1.0 where the label assignment marks a focus pixel and 0.0 elsewhere.

    With noise: ground-truth detections are dropped with miss_rate, kept box
    positions are jittered uniformly within +-jitter_px (then clamped to the
    frame), Poisson(false_positive_rate * frame_Mpx) false positives with
    small-band sizes and scores in [0.5, 1) are added, and the map gets
    additive Gaussian noise clipped back to [0, 1]. All draws come from a
    generator keyed on (seed, image id, region, zoom), so repeated calls are
    identical regardless of call order.
    """
    noise = noise or OracleNoise()
    label_params = label_params or LabelParams()
    if region.space.kind != "original":
        raise ValueError("oracle regions are original-space rects")
    eps = 1e-6
    if region.x < -eps or region.y < -eps or region.x2 > scene.width + eps or region.y2 > scene.height + eps:
        raise ValueError(f"region {region.as_tuple()} outside {scene.width}x{scene.height} scene")
    if zoom <= 0:
        raise ValueError("zoom must be positive")

    frame_w, frame_h = _frame_dims(region, zoom)
    chip_space = Space.chip(None)
    local_boxes: list[BoxPx] = []
    categories: list[int] = []
    for obj in scene.objects:
        if intersection_area(obj.box, region) <= 0:
            continue
        b = obj.box
        cx = max(b.x, region.x)
        cy = max(b.y, region.y)
        cw = min(b.x2, region.x2) - cx
        ch = min(b.y2, region.y2) - cy
        # frame dims are rounded, so scaled boxes may poke past them by < 0.5 px
        lx = min((cx - region.x) * zoom, frame_w - eps)
        ly = min((cy - region.y) * zoom, frame_h - eps)
        local_boxes.append(
            BoxPx(lx, ly, min(cw * zoom, frame_w - lx), min(ch * zoom, frame_h - ly), chip_space)
        )
        categories.append(obj.category)

    cell_params = replace(label_params, stride=stride)
    labels = assign_labels(local_boxes, frame_w, frame_h, cell_params)
    prob = (labels == POSITIVE).astype(np.float64)

    detections = [
        Detection(box=b, score=1.0, category=c) for b, c in zip(local_boxes, categories)
    ]
    if not noise.active:
        return detections, prob

    rng = _region_rng(noise, scene.image_id, region, zoom)
    kept: list[Detection] = []
    for det in detections:
        if rng.random() < noise.miss_rate:
            continue
        kept.append(det)
    if noise.jitter_px > 0:
        jittered = []
        for det in kept:
            b = det.box
            dx = rng.uniform(-noise.jitter_px, noise.jitter_px)
            dy = rng.uniform(-noise.jitter_px, noise.jitter_px)
            w = min(b.w, float(frame_w))
            h = min(b.h, float(frame_h))
            x = min(max(b.x + dx, 0.0), frame_w - w)
            y = min(max(b.y + dy, 0.0), frame_h - h)
            jittered.append(replace(det, box=BoxPx(x, y, w, h, chip_space)))
        kept = jittered
    if noise.false_positive_rate > 0:
        lam = noise.false_positive_rate * (frame_w * frame_h) / 1e6
        pool = scene.categories or (1,)
        for _ in range(int(rng.poisson(lam))):
            size = rng.uniform(label_params.small_min, label_params.small_max)
            aspect = rng.uniform(0.6, 1.0 / 0.6)
            w = min(max(1.0, size * math.sqrt(aspect)), float(frame_w))
            h = min(max(1.0, size / math.sqrt(aspect)), float(frame_h))
            x = rng.uniform(0.0, frame_w - w)
            y = rng.uniform(0.0, frame_h - h)
            score = float(rng.uniform(0.5, 1.0))
            category = int(pool[int(rng.integers(0, len(pool)))])
            kept.append(Detection(BoxPx(x, y, w, h, chip_space), score, category))
    if noise.map_noise_sd > 0:
        prob = np.clip(prob + rng.normal(0.0, noise.map_noise_sd, prob.shape), 0.0, 1.0)
    return kept, prob


@dataclass(frozen=True)
class OracleDetector:
    """Detector implementation backed by oracle_detect."""

    noise: OracleNoise = field(default_factory=OracleNoise)
    label_params: LabelParams = field(default_factory=LabelParams)

    def detect(
        self, scene: object, region: BoxPx, zoom: float, stride: int
    ) -> tuple[list[Detection], np.ndarray]:
        if not isinstance(scene, Scene):
            raise TypeError("the oracle detector needs a Scene with ground truth")
        return oracle_detect(scene, region, zoom, stride, self.noise, self.label_params)


def stitch_focus_maps(
    entries: Sequence[tuple[np.ndarray, BoxPx]],
    scaled_w: float,
    scaled_h: float,
    stride: int,
) -> np.ndarray:
    """Paste per-region probability maps onto the scale's full canvas.

    Each entry is (map, frame rect) with the rect in the target scale's px.
    Rects must be pairwise non-overlapping (positive area; touching is fine).
    Maps land at the nearest cell offset; cells outside every region stay 0.
    Where rounding makes two touching regions claim the same boundary cell,
    the later entry wins.
    """
    rows, cols = math.ceil(scaled_h / stride), math.ceil(scaled_w / stride)
    canvas = np.zeros((rows, cols), dtype=np.float64)
    rects = [rect for _, rect in entries]
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            # touching rects that went through a zoom round trip can report a
            # sliver of overlap a few ulp wide; only real overlap is an error
            if intersection_area(rects[i], rects[j]) > 1e-6:
                raise ValueError(f"overlapping chips: {rects[i].as_tuple()} and {rects[j].as_tuple()}")
    for pmap, rect in entries:
        arr = np.asarray(pmap, dtype=np.float64)
        r0 = round_half_up(rect.y / stride)
        c0 = round_half_up(rect.x / stride)
        r1 = min(r0 + arr.shape[0], rows)
        c1 = min(c0 + arr.shape[1], cols)
        if r1 <= r0 or c1 <= c0:
            continue
        canvas[r0:r1, c0:c1] = arr[: r1 - r0, : c1 - c0]
    return canvas


@dataclass(frozen=True)
class ChipBatch:
    """Chips that pad to the same quantized dims and share an aspect class."""

    aspect_class: int
    padded_w: int
    padded_h: int
    count: int


def _aspect_class(w: float, h: float, buckets: int) -> int:
    center = (buckets - 1) / 2.0
    idx = round_half_up(math.log(w / h) / math.log(1.5) + center)
    return int(min(max(idx, 0), buckets - 1))


def group_chips(
    chips: Sequence[FocusChip | tuple[float, float]],
    size_quantum: int = 64,
    aspect_buckets: int = 3,
) -> list[ChipBatch]:
    """Bucket chips by aspect class and quantum-rounded dims for batching.

    Grouping only affects padded-pixel accounting, never detection results.
    """
    if size_quantum < 1 or aspect_buckets < 1:
        raise ValueError("size_quantum and aspect_buckets must be >= 1")
    counts: dict[tuple[int, int, int], int] = {}
    for chip in chips:
        w, h = (chip.rect.w, chip.rect.h) if isinstance(chip, FocusChip) else chip
        if w <= 0 or h <= 0:
            raise ValueError("chip dims must be positive")
        key = (
            _aspect_class(w, h, aspect_buckets),
            math.ceil(w / size_quantum) * size_quantum,
            math.ceil(h / size_quantum) * size_quantum,
        )
        counts[key] = counts.get(key, 0) + 1
    return [ChipBatch(a, w, h, n) for (a, w, h), n in sorted(counts.items())]


def padded_pixels(batches: Sequence[ChipBatch]) -> int:
    return sum(b.padded_w * b.padded_h * b.count for b in batches)


@dataclass(frozen=True)
class ScalePixels:
    """Pixel accounting for one scale: regions processed, raw frame pixels,
    and pixels after batch padding."""

    scale_index: int
    chip_count: int
    raw_pixels: int
    padded_pixels: int


@dataclass(frozen=True)
class PixelReport:
    """Where the pixels went, per scale, against the process-everything baseline."""

    per_scale: tuple[ScalePixels, ...]
    baseline_pixels: int

    @property
    def total_raw_pixels(self) -> int:
        return sum(s.raw_pixels for s in self.per_scale)

    @property
    def total_padded_pixels(self) -> int:
        return sum(s.padded_pixels for s in self.per_scale)

    @property
    def speedup(self) -> float:
        return self.baseline_pixels / self.total_raw_pixels

    def to_dict(self) -> dict:
        return {
            "per_scale": [
                {
                    "scale_index": s.scale_index,
                    "chip_count": s.chip_count,
                    "raw_pixels": s.raw_pixels,
                    "padded_pixels": s.padded_pixels,
                }
                for s in self.per_scale
            ],
            "total_raw_pixels": self.total_raw_pixels,
            "total_padded_pixels": self.total_padded_pixels,
            "baseline_pixels": self.baseline_pixels,
            "speedup": self.speedup,
        }


@dataclass(frozen=True)
class CascadeResult:
    """Final detections, the pixel report, and the chips per producing scale."""

    detections: tuple[Detection, ...]
    report: PixelReport
    chips: dict[int, tuple[FocusChip, ...]]


def _normalize_chip_params(chip_params: ChipParams | Sequence[ChipParams], n_scales: int) -> list[ChipParams]:
    if isinstance(chip_params, ChipParams):
        return [chip_params] * max(n_scales - 1, 0)
    params = list(chip_params)
    if len(params) == n_scales:
        params = params[:-1]
    if len(params) != max(n_scales - 1, 0):
        raise ValueError(f"need chip params for the {n_scales - 1} chip-producing scales, got {len(params)}")
    return params


def _retag(dets: Sequence[Detection], chip_id: int, scale_index: int) -> tuple[Detection, ...]:
    tagged = []
    for det in dets:
        box = replace(det.box, space=Space.chip(chip_id))
        tagged.append(replace(det, box=box, scale_index=scale_index, chip_id=chip_id))
    return tuple(tagged)


def _check_map(pmap: np.ndarray, frame_w: int, frame_h: int, stride: int) -> np.ndarray:
    arr = np.asarray(pmap)
    expected = (math.ceil(frame_h / stride), math.ceil(frame_w / stride))
    if arr.ndim != 2 or arr.shape != expected:
        raise DetectorContractError(f"detector returned map of shape {arr.shape}, expected {expected}")
    return arr


def _build_report(
    config: PyramidConfig,
    frames_per_scale: dict[int, list[tuple[int, int]]],
    sdims_by_index: dict[int, tuple[int, int]],
    size_quantum: int,
    aspect_buckets: int,
) -> PixelReport:
    per_scale = []
    for scale in config.scales:
        frames = frames_per_scale.get(scale.index, [])
        raw = sum(w * h for w, h in frames)
        padded = padded_pixels(group_chips(frames, size_quantum, aspect_buckets)) if frames else 0
        per_scale.append(ScalePixels(scale.index, len(frames), raw, padded))
    baseline = sum(w * h for w, h in sdims_by_index.values())
    return PixelReport(tuple(per_scale), baseline)


def run_cascade(
    scene: object,
    detector: Detector,
    config: PyramidConfig,
    chip_params: ChipParams | Sequence[ChipParams] = ChipParams(),
    stack_params: StackParams = StackParams(),
    *,
    size_quantum: int = 64,
    aspect_buckets: int = 3,
) -> CascadeResult:
    """Run the coarse-to-fine cascade over one scene.

    chip_params may be a single ChipParams shared by every chip-producing
    scale or a per-scale sequence; entry i governs the chips cut from scale
    i's stitched map. Its min_chip_side is interpreted at the zoom-in
    (processing) resolution and converted to producing-scale px internally,
    so k=512 means the finer scale sees frames of at least 512 px per side.

    Identical (scene, detector seed, config) inputs give bit-identical
    results.
    """
    if not hasattr(scene, "width") or not hasattr(scene, "height"):
        raise TypeError("scene must expose width/height")
    width = float(scene.width)
    height = float(scene.height)
    scales = config.scales
    params_list = _normalize_chip_params(chip_params, len(scales))
    zooms = [resize_factor(s, width, height) for s in scales]
    sdims = [
        (max(1, round_half_up(width * z)), max(1, round_half_up(height * z))) for z in zooms
    ]
    sdims_by_index = {s.index: d for s, d in zip(scales, sdims)}

    captures: list[ChipCapture] = []
    chips_out: dict[int, tuple[FocusChip, ...]] = {}
    frames_per_scale: dict[int, list[tuple[int, int]]] = {s.index: [] for s in scales}
    next_chip_id = 0

    first = FocusChip(
        BoxPx(0.0, 0.0, float(sdims[0][0]), float(sdims[0][1]), Space.scaled(scales[0].index)),
        scales[0].index,
        next_chip_id,
    )
    next_chip_id += 1
    regions: list[tuple[float, float, float, float, FocusChip]] = [(0.0, 0.0, width, height, first)]

    for pos, scale in enumerate(scales):
        zoom = zooms[pos]
        sw, sh = sdims[pos]
        entries: list[tuple[np.ndarray, BoxPx]] = []
        for ox, oy, ow, oh, chip in regions:
            frame_w, frame_h = _frame_dims(BoxPx(ox, oy, ow, oh, Space.original()), zoom)
            dets, pmap = detector.detect(scene, BoxPx(ox, oy, ow, oh, Space.original()), zoom, config.stride)
            pmap = _check_map(pmap, frame_w, frame_h, config.stride)
            src_dims = sdims_by_index[chip.source_scale]
            captures.append(
                ChipCapture(
                    chip=chip,
                    scale_index=scale.index,
                    zoom=zoom,
                    origin_x=ox,
                    origin_y=oy,
                    frame_w=float(frame_w),
                    frame_h=float(frame_h),
                    scaled_w=float(src_dims[0]),
                    scaled_h=float(src_dims[1]),
                    detections=_retag(dets, chip.id, scale.index),
                )
            )
            frames_per_scale[scale.index].append((frame_w, frame_h))
            if pos + 1 < len(scales):
                entries.append((pmap, BoxPx(ox * zoom, oy * zoom, ow * zoom, oh * zoom, Space.scaled(scale.index))))

        if pos + 1 == len(scales):
            break
        stitched = stitch_focus_maps(entries, sw, sh, config.stride)
        base = params_list[pos]
        k_eff = max(1, math.ceil(base.min_chip_side * zoom / zooms[pos + 1]))
        chips = generate_chips(
            stitched,
            ChipParams(base.threshold, base.dilation, k_eff),
            sw,
            sh,
            config.stride,
            source_scale=scale.index,
        )
        chips = [replace(c, id=next_chip_id + i) for i, c in enumerate(chips)]
        next_chip_id += len(chips)
        chips_out[scale.index] = tuple(chips)
        if not chips:
            break
        # the scaled canvas rounds up past the image, so full-span chips can
        # back-project slightly outside it; clip regions to the image
        regions = []
        for c in chips:
            ox = max(0.0, c.rect.x / zoom)
            oy = max(0.0, c.rect.y / zoom)
            ow = min(width, c.rect.x2 / zoom) - ox
            oh = min(height, c.rect.y2 / zoom) - oy
            regions.append((ox, oy, ow, oh, c))

    report = _build_report(config, frames_per_scale, sdims_by_index, size_quantum, aspect_buckets)
    finals = focus_stack(captures, config, stack_params)
    return CascadeResult(tuple(finals), report, chips_out)


def run_full_pyramid(
    scene: object,
    detector: Detector,
    config: PyramidConfig,
    stack_params: StackParams = StackParams(),
    *,
    size_quantum: int = 64,
    aspect_buckets: int = 3,
) -> CascadeResult:
    """Process every scale in full (no chips) and stack the same way.

    This is the reference the cascade is measured against: with a noise-free
    oracle both produce identical final detections, and its report's raw
    pixels equal the baseline by construction.
    """
    width = float(scene.width)
    height = float(scene.height)
    scales = config.scales
    zooms = [resize_factor(s, width, height) for s in scales]
    sdims = [
        (max(1, round_half_up(width * z)), max(1, round_half_up(height * z))) for z in zooms
    ]
    sdims_by_index = {s.index: d for s, d in zip(scales, sdims)}

    captures = []
    frames_per_scale: dict[int, list[tuple[int, int]]] = {}
    for pos, scale in enumerate(scales):
        zoom = zooms[pos]
        sw, sh = sdims[pos]
        region = BoxPx(0.0, 0.0, width, height, Space.original())
        frame_w, frame_h = _frame_dims(region, zoom)
        dets, pmap = detector.detect(scene, region, zoom, config.stride)
        _check_map(pmap, frame_w, frame_h, config.stride)
        chip = FocusChip(BoxPx(0.0, 0.0, float(sw), float(sh), Space.scaled(scale.index)), scale.index, pos)
        captures.append(
            ChipCapture(
                chip=chip,
                scale_index=scale.index,
                zoom=zoom,
                origin_x=0.0,
                origin_y=0.0,
                frame_w=float(frame_w),
                frame_h=float(frame_h),
                scaled_w=float(sw),
                scaled_h=float(sh),
                detections=_retag(dets, chip.id, scale.index),
            )
        )
        frames_per_scale[scale.index] = [(frame_w, frame_h)]

    report = _build_report(config, frames_per_scale, sdims_by_index, size_quantum, aspect_buckets)
    finals = focus_stack(captures, config, stack_params)
    return CascadeResult(tuple(finals), report, {})
