"""Coarse-to-fine multi-scale detection inference.

A detector is pointed at a small version of the image first; cells likely to
contain small objects are marked on a probability map, grown into rectangular
chips, and only those chips are re-processed at the next finer scale. Focus
stacking merges the per-chip detections back into original-image coordinates,
and pixel reports quantify the savings against processing every scale in full.
"""

from .cascade import (
    CascadeResult,
    ChipBatch,
    Detector,
    DetectorContractError,
    InfeasibleSceneError,
    OracleDetector,
    OracleNoise,
    PixelReport,
    ScalePixels,
    Scene,
    SceneObject,
    SceneSpec,
    group_chips,
    oracle_detect,
    padded_pixels,
    run_cascade,
    run_full_pyramid,
    stitch_focus_maps,
    synth_scene,
)
from .chips import (
    ChipParams,
    Component,
    FocusChip,
    binarize,
    connected_components,
    dilate,
    enclose_components,
    generate_chips,
    merge_chips,
)
from .fileio import (
    FpmFormatError,
    FpmMagicError,
    FpmSizeMismatchError,
    FpmTruncatedError,
    read_annotations,
    read_chips,
    read_detections,
    read_fpm,
    read_json,
    write_chips,
    write_csv,
    write_detections,
    write_fpm,
    write_json,
)
from .geometry import (
    BoxPx,
    ChipGeom,
    Detection,
    ProjectionError,
    ProjectionGeometry,
    PyramidConfig,
    ScaleSpec,
    Space,
    SpaceMismatchError,
    enclose,
    intersection_area,
    iou,
    overlaps,
    project_box,
    resize_factor,
    resized_dims,
    round_half_up,
)
from .labeling import (
    INVALID,
    NEGATIVE,
    POSITIVE,
    LabelParams,
    LabelStats,
    assign_labels,
    label_map_dims,
    label_stats,
)
from .metrics import (
    DEFAULT_IOU_THRESHOLDS,
    APResult,
    CurvePoint,
    average_precision,
    confident_subset,
    focuschip_recall,
    focuspixel_recall,
    speedup_bound,
)
from .stacking import (
    ChipCapture,
    StackParams,
    filter_valid_range,
    focus_stack,
    prune_boundary_detections,
    soft_nms,
)

__version__ = "0.1.0"

__all__ = [
    "APResult",
    "BoxPx",
    "CascadeResult",
    "ChipBatch",
    "ChipCapture",
    "ChipGeom",
    "ChipParams",
    "Component",
    "CurvePoint",
    "DEFAULT_IOU_THRESHOLDS",
    "Detection",
    "Detector",
    "DetectorContractError",
    "FocusChip",
    "FpmFormatError",
    "FpmMagicError",
    "FpmSizeMismatchError",
    "FpmTruncatedError",
    "InfeasibleSceneError",
    "INVALID",
    "LabelParams",
    "LabelStats",
    "NEGATIVE",
    "OracleDetector",
    "OracleNoise",
    "PixelReport",
    "POSITIVE",
    "ProjectionError",
    "ProjectionGeometry",
    "PyramidConfig",
    "ScalePixels",
    "ScaleSpec",
    "Scene",
    "SceneObject",
    "SceneSpec",
    "Space",
    "SpaceMismatchError",
    "StackParams",
    "assign_labels",
    "average_precision",
    "binarize",
    "confident_subset",
    "connected_components",
    "dilate",
    "enclose",
    "enclose_components",
    "filter_valid_range",
    "focus_stack",
    "focuschip_recall",
    "focuspixel_recall",
    "generate_chips",
    "group_chips",
    "intersection_area",
    "iou",
    "label_map_dims",
    "label_stats",
    "merge_chips",
    "oracle_detect",
    "overlaps",
    "padded_pixels",
    "project_box",
    "prune_boundary_detections",
    "read_annotations",
    "read_chips",
    "read_detections",
    "read_fpm",
    "read_json",
    "resize_factor",
    "resized_dims",
    "round_half_up",
    "run_cascade",
    "run_full_pyramid",
    "soft_nms",
    "speedup_bound",
    "stitch_focus_maps",
    "synth_scene",
    "write_chips",
    "write_csv",
    "write_detections",
    "write_fpm",
    "write_json",
    "__version__",
]
