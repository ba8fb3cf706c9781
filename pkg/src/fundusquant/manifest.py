"""Batch manifests: which files belong to which image, and metric pairs.

An image manifest is one JSON document (schema_version 1) with an "images"
array; a CSV loader covers the flat subset for spreadsheet-driven runs.
All paths are resolved relative to the manifest's directory so a manifest
can travel with its data. The metrics command uses a separate pairs
manifest listing (pred, gt) mask files per dataset/image/class.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ManifestError

LATERALITY_VALUES = ("OD", "OS", "Unknown")

_ENTRY_KEYS = {"image_id", "photo", "masks", "labelmap", "probmaps",
               "fovea_xy", "laterality", "um_per_px"}


@dataclass(frozen=True)
class ImageEntry:
    image_id: str
    photo: str | None = None
    masks: dict = field(default_factory=dict)      # class name -> path
    labelmap: str | None = None
    probmaps: dict = field(default_factory=dict)   # class name -> path
    fovea_xy: tuple[float, float] | None = None
    laterality: str | None = None
    um_per_px: float | None = None

    @property
    def has_mask_source(self) -> bool:
        return bool(self.masks) or self.labelmap is not None


@dataclass(frozen=True)
class MetricPair:
    dataset: str
    image_id: str
    class_name: str
    pred: str
    gt: str
    um_per_px: float | None = None


def _resolve(base: Path, p) -> str:
    if not isinstance(p, str) or not p:
        raise ManifestError(f"expected a path string, got {p!r}")
    return str((base / p).resolve()) if not Path(p).is_absolute() else p


def _parse_entry(raw: dict, base: Path) -> ImageEntry:
    if not isinstance(raw, dict):
        raise ManifestError(f"image entry must be an object, got {type(raw).__name__}")
    unknown = set(raw) - _ENTRY_KEYS
    if unknown:
        raise ManifestError(f"unknown image entry key(s): {sorted(unknown)}")
    image_id = raw.get("image_id")
    if not isinstance(image_id, str) or not image_id:
        raise ManifestError("every image entry needs a non-empty string image_id")
    if any(c in image_id for c in "/\\\0") or image_id in (".", ".."):
        raise ManifestError(f"image_id {image_id!r} is not usable as a file name")

    def path_map(key):
        m = raw.get(key) or {}
        if not isinstance(m, dict):
            raise ManifestError(f"{image_id}: {key} must map class names to paths")
        return {str(k): _resolve(base, v) for k, v in m.items()}

    fovea = raw.get("fovea_xy")
    if fovea is not None:
        if (not isinstance(fovea, (list, tuple)) or len(fovea) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in fovea)):
            raise ManifestError(f"{image_id}: fovea_xy must be [x, y]")
        fovea = (float(fovea[0]), float(fovea[1]))
    lat = raw.get("laterality")
    if lat is not None and lat not in LATERALITY_VALUES:
        raise ManifestError(f"{image_id}: laterality must be one of {LATERALITY_VALUES}")
    scale = raw.get("um_per_px")
    if scale is not None:
        if not isinstance(scale, (int, float)) or isinstance(scale, bool) or scale <= 0:
            raise ManifestError(f"{image_id}: um_per_px must be a positive number")
        scale = float(scale)

    entry = ImageEntry(
        image_id=image_id,
        photo=_resolve(base, raw["photo"]) if raw.get("photo") else None,
        masks=path_map("masks"),
        labelmap=_resolve(base, raw["labelmap"]) if raw.get("labelmap") else None,
        probmaps=path_map("probmaps"),
        fovea_xy=fovea,
        laterality=lat,
        um_per_px=scale,
    )
    if not entry.has_mask_source and not entry.probmaps and entry.photo is None:
        raise ManifestError(f"{image_id}: entry references no image data at all")
    return entry


def load_manifest(path: str) -> list[ImageEntry]:
    """Parse an image manifest (JSON or CSV by extension)."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        return _load_manifest_csv(p)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}")
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"manifest {path} is not valid JSON: {e}")
    if not isinstance(doc, dict) or "images" not in doc:
        raise ManifestError(f"manifest {path} must be an object with an 'images' array")
    version = doc.get("schema_version", 1)
    if version != 1:
        raise ManifestError(f"unsupported manifest schema_version {version}")
    unknown = set(doc) - {"schema_version", "images"}
    if unknown:
        raise ManifestError(f"unknown manifest key(s): {sorted(unknown)}")
    images = doc["images"]
    if not isinstance(images, list):
        raise ManifestError("'images' must be an array")
    entries = [_parse_entry(e, p.parent) for e in images]
    seen = set()
    for e in entries:
        if e.image_id in seen:
            raise ManifestError(f"duplicate image_id {e.image_id!r}")
        seen.add(e.image_id)
    return entries


def _load_manifest_csv(p: Path) -> list[ImageEntry]:
    """CSV convenience form: fixed columns plus mask:<class>/probmap:<class>."""
    fixed = {"image_id", "photo", "labelmap", "fovea_x", "fovea_y", "laterality", "um_per_px"}
    try:
        with open(p, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {p}")
    except (OSError, csv.Error) as e:
        raise ManifestError(f"manifest {p} is not valid CSV: {e}")
    entries = []
    for row in rows:
        raw: dict = {"image_id": row.get("image_id", "")}
        masks = {}
        probmaps = {}
        for col, val in row.items():
            if col is None or val is None or not str(val).strip():
                continue
            val = str(val).strip()
            if col.startswith("mask:"):
                masks[col[len("mask:"):]] = val
            elif col.startswith("probmap:"):
                probmaps[col[len("probmap:"):]] = val
            elif col in ("photo", "labelmap", "laterality"):
                raw[col] = val
            elif col == "um_per_px":
                try:
                    raw[col] = float(val)
                except ValueError:
                    raise ManifestError(f"{raw['image_id']}: um_per_px must be numeric")
            elif col not in fixed:
                raise ManifestError(f"unknown manifest column {col!r}")
        if row.get("fovea_x", "").strip() or row.get("fovea_y", "").strip():
            try:
                raw["fovea_xy"] = [float(row["fovea_x"]), float(row["fovea_y"])]
            except (KeyError, ValueError):
                raise ManifestError(f"{raw['image_id']}: fovea_x/fovea_y must both be numeric")
        if masks:
            raw["masks"] = masks
        if probmaps:
            raw["probmaps"] = probmaps
        entries.append(_parse_entry(raw, p.parent))
    seen = set()
    for e in entries:
        if e.image_id in seen:
            raise ManifestError(f"duplicate image_id {e.image_id!r}")
        seen.add(e.image_id)
    return entries


def load_pairs(path: str) -> list[MetricPair]:
    """Parse a metric-pairs manifest (JSON with a 'pairs' array, or CSV)."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        try:
            with open(p, newline="", encoding="utf-8") as fh:
                rows = list(csv.DictReader(fh))
        except FileNotFoundError:
            raise ManifestError(f"pairs manifest not found: {path}")
        except (OSError, csv.Error) as e:
            raise ManifestError(f"pairs manifest {path} is not valid CSV: {e}")
        raw_pairs = rows
    else:
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ManifestError(f"pairs manifest not found: {path}")
        except (OSError, json.JSONDecodeError) as e:
            raise ManifestError(f"pairs manifest {path} is not valid JSON: {e}")
        if not isinstance(doc, dict) or not isinstance(doc.get("pairs"), list):
            raise ManifestError(f"pairs manifest {path} must be an object with a 'pairs' array")
        raw_pairs = doc["pairs"]
    out = []
    for raw in raw_pairs:
        if not isinstance(raw, dict):
            raise ManifestError("each pair must be an object")
        unknown = set(raw) - {"dataset", "image_id", "class", "pred", "gt", "um_per_px"}
        if unknown:
            raise ManifestError(f"unknown pair key(s): {sorted(unknown)}")
        missing = [k for k in ("image_id", "pred", "gt") if not raw.get(k)]
        if missing:
            raise ManifestError(f"pair missing required key(s): {missing}")
        scale = raw.get("um_per_px")
        if scale not in (None, ""):
            try:
                scale = float(scale)
            except (TypeError, ValueError):
                raise ManifestError(f"{raw['image_id']}: um_per_px must be numeric")
            if scale <= 0:
                raise ManifestError(f"{raw['image_id']}: um_per_px must be positive")
        else:
            scale = None
        out.append(MetricPair(
            dataset=str(raw.get("dataset") or "default"),
            image_id=str(raw["image_id"]),
            class_name=str(raw.get("class") or "all"),
            pred=_resolve(p.parent, raw["pred"]),
            gt=_resolve(p.parent, raw["gt"]),
            um_per_px=scale,
        ))
    return out
