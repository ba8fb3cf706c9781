"""Tessellation and pathological-myopia burden metrics."""

import math
from dataclasses import dataclass

import numpy as np

from .context import FundusContext
from .errors import NoContext
from .lesions import component_aspect_ratio, component_circularity
from .raster import as_mask, check_same_shape, connected_components

MYOPIA_TYPES = ("ppa", "diffuse_atrophy", "patchy_atrophy")


@dataclass(frozen=True)
class TessellationStats:
    coverage_ratio: float
    mean_circularity: float | None
    mean_aspect_ratio: float | None
    centroid_dispersion: float | None  # None when no component
    count: int


@dataclass(frozen=True)
class MyopiaTypeStats:
    count: int
    area_px: int
    coverage_ratio: float


@dataclass(frozen=True)
class MyopiaStats:
    per_type: dict[str, MyopiaTypeStats | None]  # None where the mask was absent
    global_coverage: float | None                # None when no mask was present


def tessellation_stats(mask: np.ndarray, ctx: FundusContext,
                       *, dispersion_weighting: str = "uniform") -> TessellationStats:
    """Coverage, shape and centroid dispersion of tessellated fundus patches.

    Dispersion is the RMS distance of component centroids from their mean,
    normalized by the FOV equivalent radius sqrt(area/pi); a single patch
    scores 0. ``area`` weighting biases both the mean and the RMS toward
    large patches.
    """
    if dispersion_weighting not in ("uniform", "area"):
        raise ValueError(f"unknown dispersion weighting {dispersion_weighting!r}")
    mask = as_mask(mask)
    check_same_shape(mask, ctx.fov)
    fov_area = ctx.fov_area
    if fov_area == 0:
        raise NoContext("empty field of view")
    inside = mask & ctx.fov
    comps = connected_components(inside, 8)
    coverage = float(inside.sum()) / fov_area
    if len(comps) == 0:
        return TessellationStats(coverage, None, None, None, 0)
    circ = float(np.mean([component_circularity(c) for c in comps]))
    ar = float(np.mean([component_aspect_ratio(c) for c in comps]))
    cents = np.array([c.centroid_xy for c in comps], dtype=np.float64)
    if dispersion_weighting == "area":
        w = np.array([c.area for c in comps], dtype=np.float64)
        w /= w.sum()
    else:
        w = np.full(len(comps), 1.0 / len(comps))
    mean = (cents * w[:, None]).sum(axis=0)
    rms = float(np.sqrt((w * ((cents - mean) ** 2).sum(axis=1)).sum()))
    r_fov = math.sqrt(fov_area / math.pi)
    return TessellationStats(coverage, circ, ar, rms / r_fov, len(comps))


def myopia_stats(masks: dict[str, np.ndarray | None], ctx: FundusContext) -> MyopiaStats:
    """Per-type atrophy burden plus the union coverage of everything present.

    ``masks`` maps the type names in MYOPIA_TYPES to masks (or None when a
    type was not segmented).
    """
    fov_area = ctx.fov_area
    if fov_area == 0:
        raise NoContext("empty field of view")
    unknown = set(masks) - set(MYOPIA_TYPES)
    if unknown:
        raise ValueError(f"unknown myopia types: {sorted(unknown)}")
    per: dict[str, MyopiaTypeStats | None] = {}
    union = None
    for name in MYOPIA_TYPES:
        m = masks.get(name)
        if m is None:
            per[name] = None
            continue
        m = as_mask(m)
        check_same_shape(m, ctx.fov)
        inside = m & ctx.fov
        comps = connected_components(inside, 8)
        per[name] = MyopiaTypeStats(
            count=len(comps),
            area_px=int(inside.sum()),
            coverage_ratio=float(inside.sum()) / fov_area,
        )
        union = inside if union is None else (union | inside)
    global_cov = None if union is None else float(union.sum()) / fov_area
    return MyopiaStats(per_type=per, global_coverage=global_cov)
