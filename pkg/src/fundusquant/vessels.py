"""Vascular morphometry: calibers (CRAE/CRVE/AVR), fractal dimension, tortuosity.

Calibers follow the revised Knudtson pairing: the six widest branches are
combined pairwise (largest with smallest) through 6 -> 3 -> 2 -> 1 stages
with the branching coefficient 0.88 for arteries and 0.95 for veins.
Widths are sampled where vessel centerlines cross the measurement annulus
between 1.5 and 2.0 disc radii from the disc center.
"""

import math
from dataclasses import dataclass

import numpy as np

from .context import FundusContext
from .errors import (
    DegenerateZone,
    EmptyMask,
    InsufficientVessels,
    NoBranches,
    NoVesselInZone,
    TooSmall,
)
from .graph import SkeletonGraph, skeleton_graph
from .raster import as_mask, check_same_shape, crush_blocks, distance_transform, skeletonize

KNUDTSON_COEFF = {"artery": 0.88, "vein": 0.95}


@dataclass(frozen=True, eq=False)
class MeasurementZone:
    mask: np.ndarray
    center_xy: tuple[float, float]
    inner_radius: float
    outer_radius: float


@dataclass(frozen=True, eq=False)
class BranchWidths:
    branch_id: int
    positions: np.ndarray  # arc position of each retained sample (px from branch start)
    widths: np.ndarray     # 2 x EDT at the centerline pixel (px)

    @property
    def median_width(self) -> float:
        return float(np.median(self.widths))


@dataclass(frozen=True)
class CaliberSummary:
    crae: float
    crve: float
    avr: float
    n_artery: int  # branches feeding the artery big-six (before padding, capped at 6)
    n_vein: int


@dataclass(frozen=True)
class VesselMetrics:
    crae: float
    crve: float
    avr: float
    fd_artery: float
    fd_vein: float
    tortuosity_artery: float
    tortuosity_vein: float
    n_artery: int
    n_vein: int
    n_tortuosity_excluded: int


def measurement_annulus(ctx: FundusContext, inner: float = 1.5, outer: float = 2.0) -> MeasurementZone:
    """Annulus between ``inner`` and ``outer`` disc radii, clipped to the FOV."""
    if ctx.disc_center_xy is None or ctx.disc_radius is None or ctx.disc_radius <= 0:
        raise DegenerateZone("no disc geometry")
    if not (0 < inner < outer):
        raise DegenerateZone(f"invalid annulus bounds [{inner}, {outer}]")
    cx, cy = ctx.disc_center_xy
    H, W = ctx.shape
    yy, xx = np.ogrid[:H, :W]
    r = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
    mask = (r >= inner * ctx.disc_radius) & (r <= outer * ctx.disc_radius) & ctx.fov
    if not mask.any():
        raise DegenerateZone("annulus does not intersect the field of view")
    return MeasurementZone(mask, (cx, cy), inner * ctx.disc_radius, outer * ctx.disc_radius)


def vessel_graph(m: np.ndarray) -> tuple[SkeletonGraph, np.ndarray]:
    """Skeletonize a vessel mask and extract its graph along with the EDT."""
    m = as_mask(m)
    if not m.any():
        raise EmptyMask("vessel mask is empty")
    edt = distance_transform(m)
    skel = crush_blocks(skeletonize(m))
    return skeleton_graph(skel, edt), edt


def sample_widths(m: np.ndarray, zone: MeasurementZone, *, min_samples: int = 5) -> list[BranchWidths]:
    """Vessel widths (2 x EDT) at centerline pixels inside the zone, per branch.

    Branches contributing fewer than ``min_samples`` in-zone pixels are
    dropped as unreliable crossings.
    """
    m = as_mask(m)
    check_same_shape(m, zone.mask)
    graph, edt = vessel_graph(m)
    out = []
    for b in graph.branches:
        if len(b.pixels) == 0:
            continue
        inside = zone.mask[b.pixels[:, 0], b.pixels[:, 1]]
        if int(inside.sum()) < min_samples:
            continue
        steps = np.hypot(*(np.diff(b.pixels.astype(float), axis=0).T))
        pos = np.concatenate([[0.0], np.cumsum(steps)])
        out.append(BranchWidths(b.id, pos[inside], 2.0 * b.radii[inside]))
    if not out:
        raise NoVesselInZone("no branch leaves enough centerline samples in the zone")
    return out


def knudtson_equivalent(widths, vessel: str, *, coeff: float | None = None) -> float:
    """Equivalent central caliber of up to six branch widths.

    Fewer than six widths are padded with their median; stages pair the
    current largest with the current smallest, carrying the middle value of
    odd stages, until one value remains. ``coeff`` overrides the stock
    branching coefficient for the vessel kind.
    """
    if vessel not in KNUDTSON_COEFF:
        raise ValueError(f"vessel must be one of {sorted(KNUDTSON_COEFF)}, got {vessel!r}")
    c = KNUDTSON_COEFF[vessel] if coeff is None else float(coeff)
    w = sorted(float(v) for v in widths)
    if not w:
        raise InsufficientVessels(f"no {vessel} widths")
    if any(v <= 0 for v in w):
        raise ValueError("widths must be positive")
    if len(w) > 6:
        raise ValueError(f"expected at most 6 widths, got {len(w)}")
    med = float(np.median(w))
    while len(w) < 6:
        w.append(med)
    w.sort()
    while len(w) > 1:
        nxt = []
        i, j = 0, len(w) - 1
        while i < j:
            nxt.append(c * math.hypot(w[i], w[j]))
            i += 1
            j -= 1
        if i == j:
            nxt.append(w[i])
        w = sorted(nxt)
    return w[0]


def caliber_summary(artery_widths, vein_widths, *,
                    coeff_artery: float | None = None,
                    coeff_vein: float | None = None) -> CaliberSummary:
    """CRAE/CRVE/AVR from per-branch median widths via the big-six selection."""
    arteries = sorted((float(v) for v in artery_widths), reverse=True)
    veins = sorted((float(v) for v in vein_widths), reverse=True)
    if not arteries:
        raise InsufficientVessels("no artery branches in zone")
    if not veins:
        raise InsufficientVessels("no vein branches in zone")
    crae = knudtson_equivalent(arteries[:6], "artery", coeff=coeff_artery)
    crve = knudtson_equivalent(veins[:6], "vein", coeff=coeff_vein)
    return CaliberSummary(
        crae=crae,
        crve=crve,
        avr=crae / crve,
        n_artery=min(len(arteries), 6),
        n_vein=min(len(veins), 6),
    )


def box_counting_fd(m: np.ndarray) -> float:
    """Box-counting fractal dimension over dyadic box sizes 2..min(H,W)/4.

    Grids are anchored at (0, 0); the dimension is the least-squares slope
    of log N(s) against log(1/s).
    """
    m = as_mask(m)
    if not m.any():
        raise EmptyMask("fractal dimension of an empty mask")
    H, W = m.shape
    limit = min(H, W) // 4
    sizes = []
    s = 2
    while s <= limit:
        sizes.append(s)
        s *= 2
    if len(sizes) < 3:
        raise TooSmall(f"need >= 3 dyadic box sizes <= min(H, W)/4 = {limit}")
    counts = []
    for s in sizes:
        gh = -(-H // s)
        gw = -(-W // s)
        pad = np.zeros((gh * s, gw * s), dtype=bool)
        pad[:H, :W] = m
        boxes = pad.reshape(gh, s, gw, s).any(axis=(1, 3))
        counts.append(int(boxes.sum()))
    x = np.log(1.0 / np.array(sizes, dtype=np.float64))
    y = np.log(np.array(counts, dtype=np.float64))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def tortuosity(graph: SkeletonGraph, zone: MeasurementZone | None = None,
               *, min_branch_len: float = 10.0, mode: str = "arc_chord") -> tuple[float, int]:
    """Arc-length-weighted mean branch tortuosity.

    Excluded from the mean (and tallied): closed loops, branches shorter
    than ``min_branch_len``, degenerate chords, and, when a zone is given,
    branches with a minority of their pixels inside it. ``mode`` selects the
    arc-to-chord ratio (default) or a curvature-integral index
    (1 + total absolute turning per unit arc).
    """
    if mode not in ("arc_chord", "curvature"):
        raise ValueError(f"unknown tortuosity mode {mode!r}")
    num = 0.0
    den = 0.0
    excluded = 0
    for b in graph.branches:
        if b.closed or b.arc_length < min_branch_len or b.chord_length <= 1.0:
            excluded += 1
            continue
        if zone is not None:
            if len(b.pixels) == 0:
                excluded += 1
                continue
            inside = zone.mask[b.pixels[:, 0], b.pixels[:, 1]]
            if inside.sum() * 2 < len(b.pixels):
                excluded += 1
                continue
        if mode == "arc_chord":
            ratio = b.arc_length / b.chord_length
        else:
            ratio = 1.0 + _total_turning(b.points) / b.arc_length
        num += b.arc_length * ratio
        den += b.arc_length
    if den == 0.0:
        raise NoBranches("no branch eligible for tortuosity")
    return num / den, excluded


def _total_turning(points: np.ndarray) -> float:
    if len(points) < 3:
        return 0.0
    d = np.diff(points.astype(np.float64), axis=0)
    ang = np.arctan2(d[:, 0], d[:, 1])
    turn = np.diff(ang)
    turn = (turn + np.pi) % (2 * np.pi) - np.pi
    return float(np.abs(turn).sum())


def graph_skeleton_mask(graph: SkeletonGraph, shape: tuple[int, int]) -> np.ndarray:
    """Re-rasterize a skeleton graph (branch chains plus node pixels)."""
    skel = np.zeros(shape, dtype=bool)
    for b in graph.branches:
        if len(b.pixels):
            skel[b.pixels[:, 0], b.pixels[:, 1]] = True
    for n in graph.nodes:
        skel[n.pixels[:, 0], n.pixels[:, 1]] = True
    return skel


def _class_shape_metrics(m: np.ndarray, fov: np.ndarray,
                         min_branch_len: float, mode: str) -> tuple[float, float, int]:
    """(fd, tortuosity, n_excluded) for one vessel class over the whole FOV."""
    graph, _ = vessel_graph(m)
    skel = graph_skeleton_mask(graph, m.shape)
    fd = box_counting_fd(skel & fov)
    tort, excluded = tortuosity(graph, min_branch_len=min_branch_len, mode=mode)
    return fd, tort, excluded


def vessel_metrics(artery: np.ndarray, vein: np.ndarray, ctx: FundusContext,
                   *, annulus_inner: float = 1.5, annulus_outer: float = 2.0,
                   min_branch_len: float = 10.0, min_zone_samples: int = 5,
                   tortuosity_mode: str = "arc_chord") -> VesselMetrics:
    """Full vascular panel: calibers from the annulus, per-class fractal
    dimension and tortuosity over the whole field of view."""
    artery = as_mask(artery)
    vein = as_mask(vein)
    check_same_shape(artery, vein, ctx.fov)
    zone = measurement_annulus(ctx, annulus_inner, annulus_outer)
    a_widths = [bw.median_width for bw in sample_widths(artery, zone, min_samples=min_zone_samples)]
    v_widths = [bw.median_width for bw in sample_widths(vein, zone, min_samples=min_zone_samples)]
    cal = caliber_summary(a_widths, v_widths)

    fd_a, tort_a, excl_a = _class_shape_metrics(artery, ctx.fov, min_branch_len, tortuosity_mode)
    fd_v, tort_v, excl_v = _class_shape_metrics(vein, ctx.fov, min_branch_len, tortuosity_mode)
    return VesselMetrics(
        crae=cal.crae, crve=cal.crve, avr=cal.avr,
        fd_artery=fd_a, fd_vein=fd_v,
        tortuosity_artery=tort_a, tortuosity_vein=tort_v,
        n_artery=cal.n_artery, n_vein=cal.n_vein,
        n_tortuosity_excluded=excl_a + excl_v,
    )
