"""Optic disc and cup geometry: hull smoothing, CDR, ISNT rim profile.

Raw disc/cup masks are smoothed with a convex hull before any measurement,
and the cup is clipped to the disc so every ratio lands in [0, 1]. Rim
widths are cast along rays from the disc hull centroid; the anatomical
superior sits at 90 degrees (y grows downward, so angles use atan2(-dy, dx)).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoCup, NoDisc
from .raster import as_mask, check_same_shape, convex_hull_mask, hull_polygon_xy


def _moment_orientation(mask: np.ndarray) -> float:
    """Major-axis angle in degrees within [-90, 90), measured from the
    horizontal with anatomical y (up positive)."""
    ys, xs = np.nonzero(mask)
    x = xs - xs.mean()
    y = -(ys - ys.mean())  # raster y points down
    mu20 = float((x * x).mean())
    mu02 = float((y * y).mean())
    mu11 = float((x * y).mean())
    deg = math.degrees(0.5 * math.atan2(2.0 * mu11, mu20 - mu02))
    return (deg + 90.0) % 180.0 - 90.0


@dataclass(frozen=True, eq=False)
class DiscCupGeometry:
    disc_hull: np.ndarray
    cup_hull: np.ndarray         # already clipped to the disc hull
    disc_poly_xy: np.ndarray     # hull vertices, (K, 2) int (x, y)
    cup_poly_xy: np.ndarray      # empty (0, 2) when no cup
    disc_center_xy: tuple[float, float]
    disc_area: int
    cup_area: int
    disc_extent: tuple[int, int]  # (horizontal, vertical) in px
    cup_extent: tuple[int, int]
    orientation_disc: float       # degrees in [-90, 90)
    orientation_cup: float | None
    cup_clipped: bool             # cup hull reached past the disc hull

    @property
    def has_cup(self) -> bool:
        return self.cup_area > 0


@dataclass(frozen=True)
class CdrValues:
    h_cdr: float
    v_cdr: float
    area_cdr: float


@dataclass(frozen=True)
class RimProfile:
    superior: float
    inferior: float
    lateral_pos_x: float        # mean rim width toward +x (image right)
    lateral_neg_x: float        # toward -x (image left)
    laterality: str
    n_ray_misses: int
    disc_right_of_fovea: str = "OD"  # laterality convention the mapping was made under

    @property
    def oriented(self) -> bool:
        return self.laterality in ("OD", "OS")

    @property
    def _fovea_side_is_neg_x(self) -> bool:
        # the macula always lies temporal to the disc, so the fovea side of
        # the frame is the temporal side; it is -x when the disc sits right
        # of the fovea, which the convention ties to one laterality label
        return self.laterality == self.disc_right_of_fovea

    @property
    def nasal(self) -> float | None:
        if not self.oriented:
            return None
        return self.lateral_pos_x if self._fovea_side_is_neg_x else self.lateral_neg_x

    @property
    def temporal(self) -> float | None:
        if not self.oriented:
            return None
        return self.lateral_neg_x if self._fovea_side_is_neg_x else self.lateral_pos_x

    @property
    def isnt_satisfied(self) -> bool | None:
        """Inferior >= Superior >= Nasal >= Temporal; None when unoriented.

        Raster ties count as equal, so the chain tolerates float-summation
        noise far below any measurable rim difference.
        """
        if not self.oriented:
            return None
        eps = 1e-9
        return (
            self.inferior >= self.superior - eps
            and self.superior >= self.nasal - eps
            and self.nasal >= self.temporal - eps
        )


def _extent(mask: np.ndarray) -> tuple[int, int]:
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return (0, 0)
    return (int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))


def disc_cup_geometry(disc: np.ndarray, cup: np.ndarray) -> DiscCupGeometry:
    """Hull both masks and clip the cup into the disc.

    An empty cup is legal; cup-dependent metrics are then unavailable and
    cdr/isnt raise NoCup.
    """
    disc = as_mask(disc)
    cup = as_mask(cup)
    check_same_shape(disc, cup)
    if not disc.any():
        raise NoDisc("disc mask is empty")
    disc_hull = convex_hull_mask(disc)
    clipped = False
    if cup.any():
        cup_raw = convex_hull_mask(cup)
        cup_hull = cup_raw & disc_hull
        clipped = bool((cup_raw & ~disc_hull).any())
        # intersection of two convex rasters stays convex, so the polygon
        # of the clipped set is well defined
        cup_poly = hull_polygon_xy(cup_hull) if cup_hull.any() else np.empty((0, 2), dtype=np.int64)
        orient_cup = _moment_orientation(cup_hull) if cup_hull.any() else None
    else:
        cup_hull = np.zeros_like(disc_hull)
        cup_poly = np.empty((0, 2), dtype=np.int64)
        orient_cup = None
    ys, xs = np.nonzero(disc_hull)
    return DiscCupGeometry(
        disc_hull=disc_hull,
        cup_hull=cup_hull,
        disc_poly_xy=hull_polygon_xy(disc_hull),
        cup_poly_xy=cup_poly,
        disc_center_xy=(float(xs.mean()), float(ys.mean())),
        disc_area=int(disc_hull.sum()),
        cup_area=int(cup_hull.sum()),
        disc_extent=_extent(disc_hull),
        cup_extent=_extent(cup_hull),
        orientation_disc=_moment_orientation(disc_hull),
        orientation_cup=orient_cup,
        cup_clipped=clipped,
    )


def cdr(geom: DiscCupGeometry) -> CdrValues:
    """Horizontal, vertical and area cup-to-disc ratios of the smoothed masks."""
    if not geom.has_cup:
        raise NoCup("cup mask is empty")
    return CdrValues(
        h_cdr=geom.cup_extent[0] / geom.disc_extent[0],
        v_cdr=geom.cup_extent[1] / geom.disc_extent[1],
        area_cdr=geom.cup_area / geom.disc_area,
    )


def _ray_exit_t(poly_xy: np.ndarray, origin: tuple[float, float], direction: tuple[float, float]) -> float | None:
    """Largest t >= 0 where origin + t * direction crosses the polygon boundary."""
    ox, oy = origin
    dx, dy = direction
    n = len(poly_xy)
    best = None
    for i in range(n):
        x1, y1 = float(poly_xy[i][0]), float(poly_xy[i][1])
        x2, y2 = float(poly_xy[(i + 1) % n][0]), float(poly_xy[(i + 1) % n][1])
        ex, ey = x2 - x1, y2 - y1
        denom = dx * ey - dy * ex
        if abs(denom) < 1e-12:
            continue
        # origin + t d = v1 + s e
        t = ((x1 - ox) * ey - (y1 - oy) * ex) / denom
        s = ((x1 - ox) * dy - (y1 - oy) * dx) / denom
        if t >= 0 and -1e-9 <= s <= 1 + 1e-9:
            if best is None or t > best:
                best = t
    return best


def isnt(geom: DiscCupGeometry, laterality: str = "Unknown",
         *, disc_right_of_fovea: str = "OD", ray_step_deg: float = 1.0,
         sector_boundaries_deg: tuple[float, float, float, float] = (45.0, 135.0, 225.0, 315.0)) -> RimProfile:
    """Rim widths by sector from ray casting at ``ray_step_deg`` steps.

    Each ray measures disc-boundary distance minus cup-boundary distance
    from the disc centroid (zero floor). Sectors are the spans between the
    four boundary angles, superior first; laterality maps the two lateral
    sectors to nasal/temporal. Rays that never cross the disc boundary are
    excluded from the means and counted.
    """
    if not geom.has_cup:
        raise NoCup("cup mask is empty")
    b0, b1, b2, b3 = sector_boundaries_deg
    cx, cy = geom.disc_center_xy
    sums = [0.0, 0.0, 0.0, 0.0]  # superior, inferior, +x, -x
    counts = [0, 0, 0, 0]
    misses = 0
    n_rays = int(round(360.0 / ray_step_deg))
    for i in range(n_rays):
        # half-step offset keeps rays off the sector boundaries and makes
        # the sample set symmetric under horizontal mirroring
        deg = (i + 0.5) * ray_step_deg
        th = math.radians(deg)
        # anatomical angle: 90 deg = up; y axis points down in rasters
        d = (math.cos(th), -math.sin(th))
        t_disc = _ray_exit_t(geom.disc_poly_xy, (cx, cy), d)
        if t_disc is None:
            misses += 1
            continue
        t_cup = _ray_exit_t(geom.cup_poly_xy, (cx, cy), d)
        rim = max(t_disc - (t_cup if t_cup is not None else 0.0), 0.0)
        if b0 <= deg < b1:
            k = 0
        elif b2 <= deg < b3:
            k = 1
        elif deg < b0 or deg >= b3:
            k = 2
        else:
            k = 3
        sums[k] += rim
        counts[k] += 1
    means = [s / c if c else 0.0 for s, c in zip(sums, counts)]
    return RimProfile(
        superior=means[0],
        inferior=means[1],
        lateral_pos_x=means[2],
        lateral_neg_x=means[3],
        laterality=laterality,
        n_ray_misses=misses,
        disc_right_of_fovea=disc_right_of_fovea,
    )
