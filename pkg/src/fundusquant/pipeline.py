"""End-to-end quantification: manifest entry in, biomarker report out.

quantify_image never aborts over a missing segmentation class; each block
degrades field by field to undefined with the triggering error code as the
reason. Hard failures (unreadable files, unknown class names, shape
disagreements) abort that image only; run_batch turns them into failure
records and keeps going.
"""

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ._version import __version__
from .config import QuantConfig
from .context import FundusContext, build_context
from .errors import (
    FundusQuantError,
    ManifestError,
    NoCup,
    NoDisc,
    NoFOV,
    ShapeMismatch,
)
from .lesions import lesion_stats, severity_grade
from .manifest import ImageEntry, load_manifest
from .optic import cdr, disc_cup_geometry, isnt
from .phenotypes import MYOPIA_TYPES, myopia_stats, tessellation_stats
from .pngio import read_labelmap, read_mask, read_photo_gray
from .raster import estimate_fov
from .report import CSV_COLUMNS, SCHEMA_VERSION, count_metrics, csv_rows, ok, to_json, undefined
from .taxonomy import Registry, default_registry
from .vessels import (
    box_counting_fd,
    graph_skeleton_mask,
    knudtson_equivalent,
    measurement_annulus,
    sample_widths,
    tortuosity,
    vessel_graph,
)

MISSING = "MissingInput"

MYOPIA_CLASS_KEYS = {
    "Peripapillary Atrophy": "ppa",
    "Diffuse Atrophy": "diffuse_atrophy",
    "Patchy Atrophy": "patchy_atrophy",
}


def _slug(name: str) -> str:
    return name.lower().replace(" ", "_")


def load_class_masks(entry: ImageEntry, registry: Registry) -> dict[int, np.ndarray]:
    """Per-class binary masks keyed by class id, from files and/or label map."""
    masks: dict[int, np.ndarray] = {}
    for name in sorted(entry.masks):
        cd = registry.by_name(name)
        if cd.id in masks:
            raise ManifestError(f"{entry.image_id}: class {cd.name!r} supplied twice")
        masks[cd.id] = read_mask(entry.masks[name])
    if entry.labelmap is not None:
        ids = read_labelmap(entry.labelmap)
        for i in np.unique(ids):
            if i == 0:
                continue
            cd = registry.by_id(int(i))
            if cd.id in masks:
                raise ManifestError(
                    f"{entry.image_id}: class {cd.name!r} in both label map and mask file")
            masks[cd.id] = ids == i
    return masks


def _check_shapes(entry: ImageEntry, masks: dict, gray) -> tuple[int, int]:
    shapes = {m.shape for m in masks.values()}
    if gray is not None:
        shapes.add(gray.shape)
    if len(shapes) > 1:
        raise ShapeMismatch(f"{entry.image_id}: raster shapes disagree: {sorted(shapes)}")
    return next(iter(shapes))


def _degraded_context(entry: ImageEntry, shape, gray) -> FundusContext:
    fov = np.ones(shape, dtype=bool)
    fov_source = "full_frame"
    if gray is not None:
        try:
            fov = estimate_fov(gray)
            fov_source = "estimated"
        except NoFOV:
            pass
    fovea = entry.fovea_xy
    lat = entry.laterality or "Unknown"
    return FundusContext(
        shape=shape, fov=fov, fov_source=fov_source,
        disc_center_xy=None, disc_radius=None,
        fovea_xy=fovea, fovea_source="provided" if fovea else "absent",
        laterality=lat,
        laterality_source="provided" if entry.laterality else "unknown",
    )


def _context_block(ctx: FundusContext, disc_present: bool) -> dict:
    disc_reason = "NoDisc" if disc_present else MISSING
    block = {
        "fov_area_px": ok(ctx.fov_area),
        "fov_source": ok(ctx.fov_source),
    }
    if ctx.disc_center_xy is not None:
        block["disc_center_x"] = ok(ctx.disc_center_xy[0])
        block["disc_center_y"] = ok(ctx.disc_center_xy[1])
        block["disc_radius_px"] = ok(ctx.disc_radius)
    else:
        block["disc_center_x"] = undefined(disc_reason)
        block["disc_center_y"] = undefined(disc_reason)
        block["disc_radius_px"] = undefined(disc_reason)
    if ctx.fovea_xy is not None:
        block["fovea_x"] = ok(ctx.fovea_xy[0])
        block["fovea_y"] = ok(ctx.fovea_xy[1])
    else:
        reason = "FoveaNotFound" if ctx.fovea_source != "provided" else MISSING
        block["fovea_x"] = undefined(reason)
        block["fovea_y"] = undefined(reason)
    block["fovea_source"] = ok(ctx.fovea_source)
    block["laterality"] = ok(ctx.laterality)
    block["laterality_source"] = ok(ctx.laterality_source)
    return block


def _vessel_block(artery, vein, ctx: FundusContext, cfg: QuantConfig) -> dict:
    v = cfg.vessel
    block = {}

    zone = None
    zone_reason = None
    if artery is not None or vein is not None:
        try:
            zone = measurement_annulus(ctx, v.annulus[0], v.annulus[1])
        except FundusQuantError as e:
            zone_reason = e.code

    def widths_of(mask):
        return [bw.median_width
                for bw in sample_widths(mask, zone, min_samples=v.min_zone_samples)]

    a_widths = v_widths = None
    a_reason = MISSING if artery is None else zone_reason
    v_reason = MISSING if vein is None else zone_reason
    if artery is not None and zone is not None:
        try:
            a_widths = widths_of(artery)
        except FundusQuantError as e:
            a_reason = e.code
    if vein is not None and zone is not None:
        try:
            v_widths = widths_of(vein)
        except FundusQuantError as e:
            v_reason = e.code

    crae = crve = None
    if a_widths:
        top = sorted(a_widths, reverse=True)[:6]
        crae = knudtson_equivalent(top, "artery", coeff=v.knudtson.artery)
        block["crae_px"] = ok(crae)
        block["n_arteries_used"] = ok(len(top))
    else:
        block["crae_px"] = undefined(a_reason or MISSING)
        block["n_arteries_used"] = undefined(a_reason or MISSING)
    if v_widths:
        top = sorted(v_widths, reverse=True)[:6]
        crve = knudtson_equivalent(top, "vein", coeff=v.knudtson.vein)
        block["crve_px"] = ok(crve)
        block["n_veins_used"] = ok(len(top))
    else:
        block["crve_px"] = undefined(v_reason or MISSING)
        block["n_veins_used"] = undefined(v_reason or MISSING)
    if crae is not None and crve is not None:
        block["avr"] = ok(crae / crve)
    else:
        block["avr"] = undefined(a_reason or v_reason or MISSING)

    for label, mask in (("artery", artery), ("vein", vein)):
        if mask is None:
            block[f"fd_{label}"] = undefined(MISSING)
            block[f"tortuosity_{label}"] = undefined(MISSING)
            continue
        try:
            graph, _ = vessel_graph(mask)
        except FundusQuantError as e:
            block[f"fd_{label}"] = undefined(e.code)
            block[f"tortuosity_{label}"] = undefined(e.code)
            continue
        try:
            skel = graph_skeleton_mask(graph, mask.shape)
            block[f"fd_{label}"] = ok(box_counting_fd(skel & ctx.fov))
        except FundusQuantError as e:
            block[f"fd_{label}"] = undefined(e.code)
        try:
            value, _ = tortuosity(graph, min_branch_len=v.min_branch_len_px,
                                  mode=v.tortuosity_mode)
            block[f"tortuosity_{label}"] = ok(value)
        except FundusQuantError as e:
            block[f"tortuosity_{label}"] = undefined(e.code)
    return block


def _optic_block(disc, cup, ctx: FundusContext, cfg: QuantConfig) -> dict:
    keys_always = ("disc_area_px", "cup_area_px", "h_cdr", "v_cdr", "area_cdr",
                   "orientation_disc_deg", "orientation_cup_deg")
    if disc is None or not disc.any():
        reason = MISSING if disc is None else "NoDisc"
        block = {k: undefined(reason) for k in keys_always}
        block["rim_superior_px"] = undefined(reason)
        block["rim_inferior_px"] = undefined(reason)
        block["rim_nasal_px"] = undefined(reason)
        block["rim_temporal_px"] = undefined(reason)
        block["isnt_satisfied"] = undefined(reason)
        block["cup_clipped"] = undefined(reason)
        return block

    cup_reason = None
    if cup is None:
        cup_reason = MISSING
        cup = np.zeros_like(disc)
    geom = disc_cup_geometry(disc, cup)
    if cup_reason is None and not geom.has_cup:
        cup_reason = "NoCup"

    block = {
        "disc_area_px": ok(geom.disc_area),
        "cup_area_px": ok(geom.cup_area) if geom.has_cup else undefined(cup_reason),
        "orientation_disc_deg": ok(geom.orientation_disc),
        "orientation_cup_deg": (
            ok(geom.orientation_cup) if geom.orientation_cup is not None
            else undefined(cup_reason)),
        "cup_clipped": ok(geom.cup_clipped) if geom.has_cup else undefined(cup_reason),
    }
    try:
        ratios = cdr(geom)
        block["h_cdr"] = ok(ratios.h_cdr)
        block["v_cdr"] = ok(ratios.v_cdr)
        block["area_cdr"] = ok(ratios.area_cdr)
    except NoCup:
        block["h_cdr"] = undefined(cup_reason)
        block["v_cdr"] = undefined(cup_reason)
        block["area_cdr"] = undefined(cup_reason)

    try:
        rim = isnt(geom, ctx.laterality,
                   disc_right_of_fovea=cfg.laterality.disc_right_of_fovea,
                   ray_step_deg=cfg.optic.ray_step_deg,
                   sector_boundaries_deg=cfg.optic.sector_boundaries_deg)
    except NoCup:
        for k in ("rim_superior_px", "rim_inferior_px", "rim_nasal_px",
                  "rim_temporal_px", "isnt_satisfied"):
            block[k] = undefined(cup_reason)
        return _ordered_optic(block)

    block["rim_superior_px"] = ok(rim.superior)
    block["rim_inferior_px"] = ok(rim.inferior)
    if rim.oriented:
        block["rim_nasal_px"] = ok(rim.nasal)
        block["rim_temporal_px"] = ok(rim.temporal)
        block["isnt_satisfied"] = ok(rim.isnt_satisfied)
    else:
        block["rim_left_px"] = ok(rim.lateral_neg_x)
        block["rim_right_px"] = ok(rim.lateral_pos_x)
        block["isnt_satisfied"] = undefined("Unoriented")
    block["n_ray_misses"] = ok(rim.n_ray_misses)
    return _ordered_optic(block)


def _ordered_optic(block: dict) -> dict:
    order = ("disc_area_px", "cup_area_px", "h_cdr", "v_cdr", "area_cdr",
             "orientation_disc_deg", "orientation_cup_deg",
             "rim_superior_px", "rim_inferior_px", "rim_nasal_px", "rim_temporal_px",
             "rim_left_px", "rim_right_px", "isnt_satisfied", "n_ray_misses",
             "cup_clipped")
    return {k: block[k] for k in order if k in block}


def _tessellation_block(mask, ctx: FundusContext, cfg: QuantConfig) -> dict:
    keys = ("coverage_ratio", "mean_circularity", "mean_aspect_ratio",
            "centroid_dispersion", "count")
    if mask is None:
        return {k: undefined(MISSING) for k in keys}
    t = tessellation_stats(mask, ctx,
                           dispersion_weighting=cfg.phenotype.dispersion_weighting)
    return {
        "coverage_ratio": ok(t.coverage_ratio),
        "mean_circularity": ok(t.mean_circularity) if t.mean_circularity is not None else undefined("EmptyMask"),
        "mean_aspect_ratio": ok(t.mean_aspect_ratio) if t.mean_aspect_ratio is not None else undefined("EmptyMask"),
        "centroid_dispersion": ok(t.centroid_dispersion) if t.centroid_dispersion is not None else undefined("EmptyMask"),
        "count": ok(t.count),
    }


def _myopia_block(masks_by_type: dict, ctx: FundusContext) -> dict:
    stats = myopia_stats({k: v for k, v in masks_by_type.items() if v is not None}, ctx)
    block = {}
    for name in MYOPIA_TYPES:
        per = stats.per_type.get(name)
        if per is None:
            block[f"{name}_count"] = undefined(MISSING)
            block[f"{name}_area_px"] = undefined(MISSING)
            block[f"{name}_coverage"] = undefined(MISSING)
        else:
            block[f"{name}_count"] = ok(per.count)
            block[f"{name}_area_px"] = ok(per.area_px)
            block[f"{name}_coverage"] = ok(per.coverage_ratio)
    block["global_coverage"] = (
        ok(stats.global_coverage) if stats.global_coverage is not None else undefined(MISSING))
    return block


def _lesion_block(stats) -> dict:
    block = {
        "count": ok(stats.count),
        "total_area_px": ok(stats.total_area_px),
        "coverage_ratio": ok(stats.coverage_ratio),
    }
    if stats.size_histogram is None:
        for k in ("n_small", "n_medium", "n_large"):
            block[k] = undefined("NoDisc")
    else:
        block["n_small"] = ok(stats.size_histogram["small"])
        block["n_medium"] = ok(stats.size_histogram["medium"])
        block["n_large"] = ok(stats.size_histogram["large"])
    block["mean_circularity"] = (
        ok(stats.mean_circularity) if stats.mean_circularity is not None else undefined("EmptyMask"))
    block["mean_aspect_ratio"] = (
        ok(stats.mean_aspect_ratio) if stats.mean_aspect_ratio is not None else undefined("EmptyMask"))
    for key, n in stats.quadrant_counts.items():
        block[f"quadrant_{key.lower()}"] = ok(n)
    block["quadrant_center"] = ok(stats.quadrant_center)
    block["severity"] = ok(stats.severity_grade)
    return block


def quantify_image(entry: ImageEntry, cfg: QuantConfig | None = None,
                   registry: Registry | None = None) -> dict:
    """Compute the full biomarker report for one manifest entry."""
    if cfg is None:
        cfg = QuantConfig()
    if registry is None:
        registry = default_registry()

    gray = read_photo_gray(entry.photo) if entry.photo else None
    masks = load_class_masks(entry, registry)
    if not masks:
        raise ManifestError(f"{entry.image_id}: no mask source to quantify")
    shape = _check_shapes(entry, masks, gray)

    def get(name: str):
        return masks.get(registry.by_name(name).id)

    disc = get("Optic Disc")
    try:
        ctx = build_context(
            disc, gray,
            fovea_xy=entry.fovea_xy, laterality=entry.laterality,
            disc_right_of_fovea=cfg.laterality.disc_right_of_fovea)
    except (NoDisc, NoFOV, ValueError):
        ctx = _degraded_context(entry, shape, gray)

    report = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "image_id": entry.image_id,
        "config_fingerprint": cfg.fingerprint,
        "laterality_convention": f"disc_right_of_fovea={cfg.laterality.disc_right_of_fovea}",
        "context": _context_block(ctx, disc_present=disc is not None),
        "vessels": _vessel_block(get("Artery"), get("Vein"), ctx, cfg),
        "optic_disc": _optic_block(disc, get("Optic Cup"), ctx, cfg),
        "tessellation": _tessellation_block(get("Tessellation"), ctx, cfg),
        "myopia": _myopia_block(
            {key: get(name) for name, key in MYOPIA_CLASS_KEYS.items()}, ctx),
    }

    lesion_defs = [cd for cd in registry.classes(group="lesion") if cd.id in masks]
    lesions = {}
    union = None
    for cd in sorted(lesion_defs, key=lambda c: c.id):
        m = masks[cd.id]
        stats = lesion_stats(
            m, ctx,
            size_mode=cfg.lesion.size_mode,
            size_bins_frac_da=cfg.lesion.size_bins_frac_da,
            size_bins_px=cfg.lesion.size_bins_px,
            severity_bins=cfg.lesion.severity_bins,
            quadrant_mode=cfg.lesion.quadrant_mode,
            disc_right_of_fovea=cfg.laterality.disc_right_of_fovea)
        lesions[_slug(cd.name)] = _lesion_block(stats)
        union = m if union is None else (union | m)
    report["lesions"] = lesions
    if union is not None:
        cov = float((union & ctx.fov).sum()) / ctx.fov_area if ctx.fov_area else 0.0
        report["lesion_burden"] = {
            "coverage_ratio": ok(cov),
            "severity": ok(severity_grade(cov, cfg.lesion.severity_bins)),
        }
    else:
        report["lesion_burden"] = {
            "coverage_ratio": undefined(MISSING),
            "severity": undefined(MISSING),
        }
    report["n_metrics"] = count_metrics(report)
    return report


def _process_one(args) -> tuple[str, str, dict | str]:
    entry, cfg = args
    try:
        return entry.image_id, "ok", quantify_image(entry, cfg)
    except FundusQuantError as e:
        return entry.image_id, "error", {"error": e.code, "message": str(e)}
    except Exception as e:  # keep one bad image from sinking the batch
        return entry.image_id, "error", {"error": type(e).__name__, "message": str(e)}


def run_batch(manifest, cfg: QuantConfig | None = None, out_dir: str | Path = ".",
              *, workers: int = 1, overlays: bool = False) -> dict:
    """Quantify every manifest image and write reports, CSV, and a summary.

    Output bytes depend only on inputs and config: results are sorted by
    image_id before writing, so the worker count never changes them.
    """
    if cfg is None:
        cfg = QuantConfig()
    entries = load_manifest(manifest) if isinstance(manifest, (str, Path)) else list(manifest)
    entries = sorted(entries, key=lambda e: e.image_id)
    out = Path(out_dir)
    (out / "reports").mkdir(parents=True, exist_ok=True)

    jobs = [(e, cfg) for e in entries]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_process_one, jobs))
    else:
        results = [_process_one(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    reports = []
    failures = []
    for image_id, status, payload in results:
        if status == "ok":
            reports.append(payload)
            (out / "reports" / f"{image_id}.json").write_text(
                to_json(payload), encoding="utf-8")
        else:
            failures.append({"image_id": image_id, **payload})

    with open(out / "reports.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for rep in reports:
            writer.writerows(csv_rows(rep))

    if overlays and reports:
        from .overlay import render_overlay
        (out / "overlays").mkdir(exist_ok=True)
        by_id = {e.image_id: e for e in entries}
        for rep in reports:
            render_overlay(by_id[rep["image_id"]], rep,
                           str(out / "overlays" / f"{rep['image_id']}.png"), cfg=cfg)

    summary = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "config_fingerprint": cfg.fingerprint,
        "n_images": len(entries),
        "n_ok": len(reports),
        "n_failed": len(failures),
        "failures": failures,
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return summary
