"""Synthetic fundus phantoms with known geometry, for tests and demos.

Every builder is deterministic in its arguments (and seed), so expected
metric values can be derived analytically or frozen as fixtures. The full
phantom lays out a plausible right eye: bright circular field of view,
bright disc with a concentric cup, a dark fovea dip temporal to the disc,
interleaved artery/vein fans, and optional phenotype/lesion shapes.
"""

import json
import math
from pathlib import Path

import numpy as np

from .pngio import write_labelmap, write_mask, write_probmap
from .taxonomy import default_registry


def disk_mask(shape, center_xy, r) -> np.ndarray:
    H, W = shape
    cx, cy = center_xy
    yy, xx = np.ogrid[:H, :W]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def annulus_band(shape, center_xy, r0, r1) -> np.ndarray:
    H, W = shape
    cx, cy = center_xy
    yy, xx = np.ogrid[:H, :W]
    d2 = (xx - cx) ** 2 + (yy - cy) ** 2
    return (d2 >= r0 * r0) & (d2 <= r1 * r1)


def thick_line(shape, p0_xy, p1_xy, width) -> np.ndarray:
    """Segment with round caps: pixels within width/2 of the segment."""
    H, W = shape
    x0, y0 = float(p0_xy[0]), float(p0_xy[1])
    x1, y1 = float(p1_xy[0]), float(p1_xy[1])
    yy, xx = np.mgrid[:H, :W]
    dx, dy = x1 - x0, y1 - y0
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return disk_mask(shape, p0_xy, width / 2.0)
    t = np.clip(((xx - x0) * dx + (yy - y0) * dy) / L2, 0.0, 1.0)
    px = x0 + t * dx
    py = y0 + t * dy
    return (xx - px) ** 2 + (yy - py) ** 2 <= (width / 2.0) ** 2


def polyline_mask(shape, points_xy, width) -> np.ndarray:
    m = np.zeros(shape, dtype=bool)
    for a, b in zip(points_xy[:-1], points_xy[1:]):
        m |= thick_line(shape, a, b, width)
    return m


def semicircle_mask(shape, center_xy, r, width) -> np.ndarray:
    """Upper half-circle arc of the given stroke width."""
    pts = []
    for k in range(91):
        th = math.pi * k / 90.0
        pts.append((center_xy[0] + r * math.cos(th), center_xy[1] - r * math.sin(th)))
    return polyline_mask(shape, pts, width)


def comb_mask(shape, x0, y0, n_teeth, tooth_len=5, spacing=7, tooth_width=1,
              margin=12) -> np.ndarray:
    """Spine with short perpendicular teeth; each tooth skeletonizes to a spur.

    The spine overhangs the outer teeth by ``margin`` so every tooth meets it
    at a genuine junction and the spine ends are too long to count as spurs.
    """
    m = np.zeros(shape, dtype=bool)
    x1 = x0 + (n_teeth - 1) * spacing
    m |= thick_line(shape, (x0 - margin, y0), (x1 + margin, y0), 1)
    for i in range(n_teeth):
        x = x0 + i * spacing
        m |= thick_line(shape, (x, y0 + 1), (x, y0 + tooth_len), tooth_width)
    return m


def vessel_fan(shape, origin_xy, n, r0, r1, widths, phase=0.0, bend=0.25, steps=24) -> np.ndarray:
    """n gently curved vessels radiating from near ``origin_xy``.

    Curvature comes from a sinusoidal angular wobble along the radius, so
    each vessel stays a single skeleton branch.
    """
    m = np.zeros(shape, dtype=bool)
    cx, cy = origin_xy
    for i in range(n):
        base = phase + 2.0 * math.pi * i / n
        width = widths[i % len(widths)]
        pts = []
        for k in range(steps + 1):
            t = k / steps
            r = r0 + t * (r1 - r0)
            th = base + bend * math.sin(math.pi * t) / max(r / max(r1, 1.0), 1e-6) * 0.2
            pts.append((cx + r * math.cos(th), cy + r * math.sin(th)))
        m |= polyline_mask(shape, pts, width)
    return m


def fundus_phantom(size: int = 512, *, with_lesions: bool = True, seed: int = 7,
                   mirror: bool = False) -> dict:
    """Complete synthetic eye: gray photo, per-class masks, known geometry.

    Returns {"gray", "masks", "fovea_xy", "laterality", "disc_center_xy",
    "disc_radius"}. ``mirror`` flips everything horizontally (and the
    laterality label) for orientation-consistency tests.
    """
    H = W = size
    shape = (H, W)
    rng = np.random.default_rng(seed)

    fov_r = 0.48 * size
    fov_c = (W / 2.0, H / 2.0)
    fov = disk_mask(shape, fov_c, fov_r)

    disc_r = max(12.0, 0.07 * size)
    disc_c = (0.68 * W, 0.50 * H)
    disc = disk_mask(shape, disc_c, disc_r)
    cup = disk_mask(shape, disc_c, disc_r / 2.0)

    fovea = (disc_c[0] - 5.0 * disc_r, disc_c[1])  # 2.5 disc-diameters temporal

    gray = np.full(shape, 0.02)
    gray[fov] = 0.55
    gray[disk_mask(shape, disc_c, disc_r * 1.1)] = 0.92
    yy, xx = np.mgrid[:H, :W]
    dip = 0.35 * np.exp(-(((xx - fovea[0]) ** 2 + (yy - fovea[1]) ** 2)
                          / (2.0 * (0.25 * disc_r) ** 2)))
    gray = np.clip(gray - dip, 0.0, 1.0)
    gray += rng.normal(0.0, 0.004, shape)
    gray = np.clip(gray, 0.0, 1.0)

    vessel_reach = min(0.92 * fov_r, 0.48 * size * 0.95)
    arteries = vessel_fan(shape, disc_c, 8, 0.6 * disc_r, vessel_reach,
                          widths=(5, 4, 6, 5, 4, 5, 6, 4), phase=0.10, bend=0.30)
    veins = vessel_fan(shape, disc_c, 8, 0.6 * disc_r, vessel_reach,
                       widths=(7, 8, 6, 7, 8, 7, 6, 8), phase=0.10 + math.pi / 8, bend=0.22)
    arteries &= fov
    veins &= fov

    tess = np.zeros(shape, dtype=bool)
    for k in range(6):
        th = 2.0 * math.pi * k / 6 + 0.4
        c = (fov_c[0] + 0.7 * fov_r * math.cos(th), fov_c[1] + 0.7 * fov_r * math.sin(th))
        tess |= disk_mask(shape, c, 0.05 * size)
    tess &= fov & ~disk_mask(shape, disc_c, disc_r * 2.2)

    ppa = annulus_band(shape, disc_c, disc_r * 1.05, disc_r * 1.45)
    ppa &= xx < disc_c[0]  # temporal crescent
    ppa &= fov

    masks = {
        "Artery": arteries,
        "Vein": veins,
        "Optic Disc": disc,
        "Optic Cup": cup,
        "Tessellation": tess,
        "Peripapillary Atrophy": ppa,
    }

    if with_lesions:
        hem = np.zeros(shape, dtype=bool)
        for dx, dy, r in ((-0.30, -0.25, 0.020), (-0.18, 0.28, 0.026), (0.05, 0.33, 0.016)):
            hem |= disk_mask(shape, (fovea[0] + dx * size, fovea[1] + dy * size), r * size)
        exu = np.zeros(shape, dtype=bool)
        for k in range(5):
            th = 0.9 * k + 0.3
            c = (fovea[0] + 0.16 * size * math.cos(th), fovea[1] + 0.16 * size * math.sin(th))
            exu |= disk_mask(shape, c, 0.008 * size + k * 0.002 * size)
        dru = np.zeros(shape, dtype=bool)
        for k in range(9):
            th = 0.7 * k
            c = (fovea[0] + 0.07 * size * math.cos(th), fovea[1] + 0.07 * size * math.sin(th))
            dru |= disk_mask(shape, c, 0.005 * size)
        masks["Hemorrhage"] = hem & fov
        masks["Exudates"] = exu & fov
        masks["Drusen"] = dru & fov

    laterality = "OD"  # disc right of fovea under the default convention
    out = {
        "gray": gray,
        "masks": masks,
        "fovea_xy": (float(fovea[0]), float(fovea[1])),
        "laterality": laterality,
        "disc_center_xy": (float(disc_c[0]), float(disc_c[1])),
        "disc_radius": float(disc_r),
    }
    if mirror:
        out["gray"] = gray[:, ::-1].copy()
        out["masks"] = {k: v[:, ::-1].copy() for k, v in masks.items()}
        out["fovea_xy"] = (W - 1.0 - fovea[0], fovea[1])
        out["disc_center_xy"] = (W - 1.0 - disc_c[0], disc_c[1])
        out["laterality"] = "OS"
    return out


def write_phantom_entry(dir_path, image_id: str, phantom: dict, *,
                        photo: bool = True, labelmap: bool = False,
                        overrides: bool = True) -> dict:
    """Write one phantom's PNGs under ``dir_path`` and return its manifest entry."""
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    entry: dict = {"image_id": image_id}
    if photo:
        from PIL import Image
        g = np.clip(np.round(phantom["gray"] * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(g, mode="L").save(d / f"{image_id}_photo.png", format="PNG")
        entry["photo"] = f"{image_id}_photo.png"
    if labelmap:
        registry = default_registry()
        ids = np.zeros(phantom["gray"].shape, dtype=np.uint8)
        for name, m in phantom["masks"].items():
            ids[m] = registry.by_name(name).id
        write_labelmap(str(d / f"{image_id}_labels.png"), ids, registry)
        entry["labelmap"] = f"{image_id}_labels.png"
    else:
        entry["masks"] = {}
        for name, m in phantom["masks"].items():
            fname = f"{image_id}_{name.lower().replace(' ', '_')}.png"
            write_mask(str(d / fname), m)
            entry["masks"][name] = fname
    if overrides:
        entry["fovea_xy"] = list(phantom["fovea_xy"])
        entry["laterality"] = phantom["laterality"]
    return entry


def write_phantom_manifest(dir_path, n: int = 4, size: int = 256, *,
                           with_lesions: bool = True, photo: bool = True) -> str:
    """A small batch of phantoms plus its JSON manifest; returns the path."""
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(n):
        ph = fundus_phantom(size, with_lesions=with_lesions, seed=100 + i)
        entries.append(write_phantom_entry(d, f"img{i:03d}", ph, photo=photo))
    manifest = {"schema_version": 1, "images": entries}
    path = d / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return str(path)
