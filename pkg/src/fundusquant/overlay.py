"""Overlay rendering: class fills, geometry guides, and a legend.

Present classes are blended over the photo (or a black canvas) with their
registry colors and alphas, in ascending class-id order so stacking is
deterministic. White guides mark the disc/cup hull outlines, the caliber
measurement annulus, and the quadrant boundaries through the fovea. The
legend swatches use the pure palette color of each present class.
"""

import numpy as np
from PIL import Image, ImageDraw

from .config import QuantConfig
from .manifest import ImageEntry
from .pngio import read_photo_rgb, write_rgb
from .raster import boundary_pixels, convex_hull_mask
from .taxonomy import Registry, default_registry

WHITE = (255, 255, 255)


def _leaf_value(report: dict, block: str, key: str):
    leaf = report.get(block, {}).get(key)
    if isinstance(leaf, dict) and leaf.get("status") == "ok":
        return leaf.get("value")
    return None


def _draw_ring(canvas: np.ndarray, cx: float, cy: float, radius: float) -> None:
    H, W = canvas.shape[:2]
    yy, xx = np.ogrid[:H, :W]
    r = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
    canvas[np.abs(r - radius) <= 0.75] = WHITE


def render_overlay(entry: ImageEntry, report: dict, out_path: str,
                   cfg: QuantConfig | None = None,
                   registry: Registry | None = None) -> None:
    from .pipeline import load_class_masks

    if cfg is None:
        cfg = QuantConfig()
    if registry is None:
        registry = default_registry()
    masks = load_class_masks(entry, registry)
    if entry.photo:
        base = read_photo_rgb(entry.photo).astype(np.float64)
        shape = base.shape[:2]
    else:
        shape = next(iter(masks.values())).shape
        base = np.zeros((*shape, 3), dtype=np.float64)

    present = [cd for cd in registry if cd.id in masks and masks[cd.id].any()]
    for cd in present:
        r, g, b, a = cd.color
        alpha = a / 255.0
        m = masks[cd.id]
        base[m] = (1.0 - alpha) * base[m] + alpha * np.array([r, g, b], dtype=np.float64)
    canvas = np.clip(np.round(base), 0, 255).astype(np.uint8)

    for name in ("Optic Disc", "Optic Cup"):
        cd = registry.by_name(name)
        m = masks.get(cd.id)
        if m is not None and m.any():
            edge = boundary_pixels(convex_hull_mask(m))
            canvas[edge[:, 0], edge[:, 1]] = WHITE

    cx = _leaf_value(report, "context", "disc_center_x")
    cy = _leaf_value(report, "context", "disc_center_y")
    radius = _leaf_value(report, "context", "disc_radius_px")
    if cx is not None and cy is not None and radius:
        inner, outer = cfg.vessel.annulus
        _draw_ring(canvas, cx, cy, inner * radius)
        _draw_ring(canvas, cx, cy, outer * radius)

    fx = _leaf_value(report, "context", "fovea_x")
    fy = _leaf_value(report, "context", "fovea_y")
    if fx is not None and fy is not None:
        H, W = canvas.shape[:2]
        img = Image.fromarray(canvas)
        draw = ImageDraw.Draw(img)
        if cfg.lesion.quadrant_mode == "diagonal":
            draw.line([(0, fy), (W - 1, fy)], fill=WHITE)
            draw.line([(fx, 0), (fx, H - 1)], fill=WHITE)
        else:
            span = max(H, W)
            draw.line([(fx - span, fy - span), (fx + span, fy + span)], fill=WHITE)
            draw.line([(fx - span, fy + span), (fx + span, fy - span)], fill=WHITE)
        canvas = np.asarray(img).copy()

    img = Image.fromarray(canvas)
    draw = ImageDraw.Draw(img)
    y = 4
    for cd in present:
        r, g, b, _ = cd.color
        draw.rectangle([4, y, 16, y + 12], fill=(r, g, b))
        draw.text((20, y + 1), cd.name, fill=WHITE)
        y += 16
    write_rgb(out_path, np.asarray(img))
