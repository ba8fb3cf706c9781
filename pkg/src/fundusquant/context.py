"""Per-image geometric frame: FOV, disc geometry, fovea, laterality.

Named point fields carry the ``_xy`` suffix and are (x, y) pixel
coordinates; rasters stay (row, col).
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import FoveaNotFound, NoDisc, ShapeMismatch
from .raster import as_mask, convex_hull_mask, estimate_fov

LATERALITY_VALUES = ("OD", "OS", "Unknown")


@dataclass(frozen=True, eq=False)
class FundusContext:
    shape: tuple[int, int]
    fov: np.ndarray
    fov_source: str                      # estimated | full_frame
    disc_center_xy: tuple[float, float] | None
    disc_radius: float | None            # equivalent radius of the hulled disc
    fovea_xy: tuple[float, float] | None
    fovea_source: str                    # provided | estimated | absent
    laterality: str                      # OD | OS | Unknown
    laterality_source: str               # provided | derived | unknown

    @property
    def fov_area(self) -> int:
        return int(self.fov.sum())


def determine_laterality(disc_center_xy, fovea_xy, shape,
                         *, disc_right_of_fovea: str = "OD") -> str:
    """Eye side from the disc-fovea horizontal relation.

    Without a fovea the frame midline substitutes for it. An exact tie (or a
    missing disc) is Unknown. The convention parameter names the laterality
    of an eye whose disc sits to the right of its fovea.
    """
    if disc_right_of_fovea not in ("OD", "OS"):
        raise ValueError(f"convention must be OD or OS, got {disc_right_of_fovea!r}")
    if disc_center_xy is None:
        return "Unknown"
    ref_x = fovea_xy[0] if fovea_xy is not None else (shape[1] - 1) / 2.0
    other = "OS" if disc_right_of_fovea == "OD" else "OD"
    if disc_center_xy[0] > ref_x:
        return disc_right_of_fovea
    if disc_center_xy[0] < ref_x:
        return other
    return "Unknown"


def localize_fovea(gray: np.ndarray, disc_center_xy, disc_radius, fov: np.ndarray,
                   *, band_inner: float = 2.0, band_outer: float = 3.0,
                   sigma_frac: float = 0.25) -> tuple[float, float]:
    """Darkest smoothed point in an annular band on the far side of the disc.

    The band spans ``band_inner``..``band_outer`` disc DIAMETERS from the
    disc center, restricted to the FOV half-plane on the side of the FOV
    centroid (the macula lies opposite the nasal disc). Smoothing sigma is
    ``sigma_frac`` x disc radius. Ties resolve to the minimum row-major pixel.
    """
    g = np.asarray(gray, dtype=np.float64)
    fov = as_mask(fov)
    if g.shape != fov.shape:
        raise ShapeMismatch(f"gray {g.shape} vs fov {fov.shape}")
    if disc_center_xy is None or disc_radius is None or disc_radius <= 0:
        raise FoveaNotFound("no disc geometry to anchor the search band")
    H, W = g.shape
    cx, cy = disc_center_xy
    d = 2.0 * disc_radius
    yy, xx = np.ogrid[:H, :W]
    r = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
    band = (r >= band_inner * d) & (r <= band_outer * d) & fov

    fys, fxs = np.nonzero(fov)
    if len(fys) == 0:
        raise FoveaNotFound("empty field of view")
    fov_cx = float(fxs.mean())
    fov_cy = float(fys.mean())
    dx, dy = fov_cx - cx, fov_cy - cy
    if dx * dx + dy * dy > 1e-18:
        side = (xx - cx) * dx + (yy - cy) * dy >= 0
        band = band & side
    if not band.any():
        raise FoveaNotFound("search band is empty")

    smoothed = ndimage.gaussian_filter(g, sigma=sigma_frac * disc_radius, mode="reflect")
    vals = np.where(band, smoothed, np.inf)
    flat = int(np.argmin(vals))  # argmin returns the first (row-major) minimum
    y, x = divmod(flat, W)
    return (float(x), float(y))


def build_context(disc_mask: np.ndarray | None = None,
                  gray: np.ndarray | None = None,
                  *,
                  fovea_xy: tuple[float, float] | None = None,
                  laterality: str | None = None,
                  disc_right_of_fovea: str = "OD",
                  fovea_band: tuple[float, float] = (2.0, 3.0),
                  fovea_sigma_frac: float = 0.25) -> FundusContext:
    """Assemble the geometric frame from whatever inputs exist.

    The disc mask (or an explicit fovea/laterality override) is required;
    without a photograph the FOV falls back to the full frame. Fovea
    localization failures degrade to an absent fovea rather than failing
    the context.
    """
    if disc_mask is None and gray is None:
        raise ValueError("need a disc mask or a luminance raster to size the frame")
    disc = as_mask(disc_mask) if disc_mask is not None else None
    g = np.asarray(gray, dtype=np.float64) if gray is not None else None
    shapes = {a.shape for a in (disc, g) if a is not None}
    if len(shapes) > 1:
        raise ShapeMismatch(f"raster shapes disagree: {sorted(shapes)}")
    shape = next(iter(shapes))

    if g is not None:
        fov = estimate_fov(g)
        fov_source = "estimated"
    else:
        fov = np.ones(shape, dtype=bool)
        fov_source = "full_frame"

    disc_center = None
    disc_radius = None
    if disc is not None and disc.any():
        hull = convex_hull_mask(disc)
        ys, xs = np.nonzero(hull)
        disc_center = (float(xs.mean()), float(ys.mean()))
        disc_radius = float(np.sqrt(len(ys) / np.pi))
    elif fovea_xy is None and laterality is None:
        raise NoDisc("disc mask empty or missing, and no geometry override")

    fovea = None
    fovea_source = "absent"
    if fovea_xy is not None:
        fx, fy = float(fovea_xy[0]), float(fovea_xy[1])
        if not (0 <= fx < shape[1] and 0 <= fy < shape[0]):
            raise ValueError(f"fovea {fovea_xy} outside the {shape} frame")
        fovea = (fx, fy)
        fovea_source = "provided"
    elif g is not None and disc_center is not None:
        try:
            fovea = localize_fovea(
                g, disc_center, disc_radius, fov,
                band_inner=fovea_band[0], band_outer=fovea_band[1],
                sigma_frac=fovea_sigma_frac,
            )
            fovea_source = "estimated"
        except FoveaNotFound:
            fovea = None

    if laterality is not None:
        if laterality not in LATERALITY_VALUES:
            raise ValueError(f"laterality must be one of {LATERALITY_VALUES}")
        lat = laterality
        lat_source = "provided"
    else:
        lat = determine_laterality(disc_center, fovea, shape,
                                   disc_right_of_fovea=disc_right_of_fovea)
        lat_source = "derived" if lat != "Unknown" else "unknown"

    return FundusContext(
        shape=shape,
        fov=fov,
        fov_source=fov_source,
        disc_center_xy=disc_center,
        disc_radius=disc_radius,
        fovea_xy=fovea,
        fovea_source=fovea_source,
        laterality=lat,
        laterality_source=lat_source,
    )
