"""File formats: the FPM1 grid container, COCO-subset annotations, and
deterministic JSON/CSV serialization for chips, detections, and reports.

FPM1 layout: 4-byte magic b"FPM1", then width and height as unsigned 32-bit
little-endian, then width*height little-endian IEEE-754 float32 values in
row-major order with row 0 at the top. Write-then-read restores the payload
bit for bit.

JSON writers format every float at 6 significant digits and keep key order
sorted, so identical inputs always produce byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .cascade import Scene, SceneObject
from .chips import FocusChip
from .geometry import BoxPx, Detection, Space

__all__ = [
    "FpmFormatError",
    "FpmMagicError",
    "FpmTruncatedError",
    "FpmSizeMismatchError",
    "write_fpm",
    "read_fpm",
    "read_annotations",
    "write_json",
    "read_json",
    "write_chips",
    "read_chips",
    "write_detections",
    "read_detections",
    "csv_text",
    "write_csv",
    "round6",
]

_MAGIC = b"FPM1"
_HEADER = struct.Struct("<4sII")


class FpmFormatError(ValueError):
    """Base error for malformed FPM1 files."""


class FpmMagicError(FpmFormatError):
    """The file does not start with the FPM1 magic."""


class FpmTruncatedError(FpmFormatError):
    """The file ends before the header or payload is complete."""


class FpmSizeMismatchError(FpmFormatError):
    """The payload holds more bytes than the header promises."""


def write_fpm(path: str | Path, grid: np.ndarray) -> None:
    """Write a 2-D grid as an FPM1 file (values stored as float32)."""
    arr = np.ascontiguousarray(np.asarray(grid, dtype="<f4"))
    if arr.ndim != 2:
        raise ValueError("FPM1 stores 2-D grids only")
    rows, cols = arr.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, cols, rows))
        f.write(arr.tobytes(order="C"))


def read_fpm(path: str | Path) -> np.ndarray:
    """Read an FPM1 file back into a float32 array of shape (height, width)."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        if data[: len(_MAGIC)] != _MAGIC[: len(data)]:
            raise FpmMagicError(f"{path}: bad magic, not an FPM1 file")
        raise FpmTruncatedError(f"{path}: truncated header ({len(data)} bytes)")
    magic, width, height = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise FpmMagicError(f"{path}: bad magic {magic!r}, not an FPM1 file")
    expected = width * height * 4
    payload = data[_HEADER.size :]
    if len(payload) < expected:
        raise FpmTruncatedError(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    if len(payload) > expected:
        raise FpmSizeMismatchError(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(height, width).copy()


def read_annotations(path: str | Path) -> list[Scene]:
    """Read a COCO-subset annotation file into scenes.

    Needs `images` (id, width, height) and optionally `annotations`
    (id, image_id, bbox [x,y,w,h], category_id) and `categories`; unknown
    fields are ignored. Boxes poking slightly past the image border are
    clipped; boxes empty after clipping are rejected by annotation id.
    """
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: not valid JSON ({e})") from None
    if not isinstance(doc, dict) or "images" not in doc:
        raise ValueError(f"{path}: missing 'images' section")

    sizes: dict[int | str, tuple[int, int]] = {}
    order: list[int | str] = []
    for img in doc["images"]:
        iid = img["id"]
        if iid in sizes:
            raise ValueError(f"{path}: duplicate image id {iid}")
        sizes[iid] = (int(img["width"]), int(img["height"]))
        order.append(iid)

    cat_ids = set()
    for cat in doc.get("categories", []):
        if cat["id"] in cat_ids:
            raise ValueError(f"{path}: duplicate category id {cat['id']}")
        cat_ids.add(cat["id"])

    objects: dict[int | str, list[SceneObject]] = {iid: [] for iid in order}
    seen_ann = set()
    for ann in doc.get("annotations", []):
        aid = ann["id"]
        if aid in seen_ann:
            raise ValueError(f"{path}: duplicate annotation id {aid}")
        seen_ann.add(aid)
        iid = ann["image_id"]
        if iid not in sizes:
            raise ValueError(f"{path}: annotation {aid} references unknown image id {iid}")
        w, h = sizes[iid]
        x0, y0, bw, bh = (float(v) for v in ann["bbox"])
        cx0, cy0 = max(x0, 0.0), max(y0, 0.0)
        cx1, cy1 = min(x0 + bw, float(w)), min(y0 + bh, float(h))
        if cx1 - cx0 <= 0 or cy1 - cy0 <= 0:
            raise ValueError(f"{path}: annotation {aid} has an empty box {ann['bbox']}")
        box = BoxPx(cx0, cy0, cx1 - cx0, cy1 - cy0, Space.original())
        objects[iid].append(SceneObject(box, int(ann["category_id"])))

    return [
        Scene(image_id=iid, width=sizes[iid][0], height=sizes[iid][1], objects=tuple(objects[iid]))
        for iid in order
    ]


def round6(x: float) -> float:
    """Round to 6 significant digits; the canonical float form in JSON files."""
    return float(f"{float(x):.6g}")


def _canon(obj: object) -> object:
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round6(float(obj))
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    return obj


def write_json(path: str | Path, obj: object) -> None:
    """Serialize deterministically: sorted keys, 6-significant-digit floats."""
    text = json.dumps(_canon(obj), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", "utf-8")


def read_json(path: str | Path) -> object:
    return json.loads(Path(path).read_text("utf-8"))


def write_chips(path: str | Path, entries: Sequence[tuple[int | str, FocusChip]]) -> None:
    """Write (image_id, chip) pairs; order is preserved as given."""
    payload = {
        "chips": [
            {
                "image_id": iid,
                "id": chip.id,
                "source_scale": chip.source_scale,
                "space": str(chip.rect.space),
                "rect": [chip.rect.x, chip.rect.y, chip.rect.w, chip.rect.h],
            }
            for iid, chip in entries
        ]
    }
    write_json(path, payload)


def read_chips(path: str | Path) -> list[tuple[int | str, FocusChip]]:
    doc = read_json(path)
    if not isinstance(doc, dict) or "chips" not in doc:
        raise ValueError(f"{path}: missing 'chips' section")
    out = []
    for row in doc["chips"]:
        rect = row["rect"]
        box = BoxPx(rect[0], rect[1], rect[2], rect[3], Space.parse(row["space"]))
        out.append((row["image_id"], FocusChip(box, int(row["source_scale"]), int(row["id"]))))
    return out


def write_detections(path: str | Path, entries: Sequence[tuple[int | str, Detection]]) -> None:
    """Write (image_id, detection) pairs; order is preserved as given."""
    payload = {
        "detections": [
            {
                "image_id": iid,
                "bbox": [d.box.x, d.box.y, d.box.w, d.box.h],
                "space": str(d.box.space),
                "score": d.score,
                "category_id": d.category,
                "scale_index": d.scale_index,
                "chip_id": d.chip_id,
            }
            for iid, d in entries
        ]
    }
    write_json(path, payload)


def read_detections(path: str | Path) -> list[tuple[int | str, Detection]]:
    doc = read_json(path)
    if not isinstance(doc, dict) or "detections" not in doc:
        raise ValueError(f"{path}: missing 'detections' section")
    out = []
    for row in doc["detections"]:
        b = row["bbox"]
        box = BoxPx(b[0], b[1], b[2], b[3], Space.parse(row["space"]))
        det = Detection(
            box=box,
            score=float(row["score"]),
            category=int(row["category_id"]),
            scale_index=row.get("scale_index"),
            chip_id=row.get("chip_id"),
        )
        out.append((row["image_id"], det))
    return out


def csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Format a small CSV with 6-significant-digit floats and a trailing newline."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(f"{round6(float(v)):g}")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    Path(path).write_text(csv_text(header, rows), "utf-8")
