"""Shared raster algorithms: components, EDT, thinning, hulls, boundaries, FOV.

Coordinate conventions: rasters are 2D numpy arrays indexed [row, col];
pixel index arrays are (N, 2) int arrays in (row, col) order, sorted
row-major. Only fields explicitly suffixed ``_xy`` elsewhere in the package
use (x, y) order. The image border counts as background for distance and
boundary computations: masks are FOV crops, and structures touching the
frame must not read as interior.
"""

import numpy as np
from scipy import ndimage

from . import _thin
from .errors import EmptyMask, NoFOV, NotThin

_STRUCT = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


def as_mask(m: np.ndarray) -> np.ndarray:
    """Validate and coerce a 2D raster to boolean."""
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError(f"mask must be 2D, got shape {a.shape}")
    if a.dtype != bool:
        a = a != 0
    return a


def check_same_shape(*arrays) -> tuple[int, int]:
    from .errors import ShapeMismatch

    shapes = {a.shape for a in arrays if a is not None}
    if len(shapes) > 1:
        raise ShapeMismatch(f"raster shapes disagree: {sorted(shapes)}")
    return next(iter(shapes))


class Component:
    """One labeled region; pixels are (N, 2) row-major (row, col)."""

    __slots__ = ("label", "pixels", "area", "centroid_xy", "bbox", "perimeter")

    def __init__(self, label, pixels, perimeter):
        self.label = int(label)
        self.pixels = pixels
        self.area = int(len(pixels))
        ys = pixels[:, 0]
        xs = pixels[:, 1]
        self.centroid_xy = (float(xs.sum()) / self.area, float(ys.sum()) / self.area)
        self.bbox = (int(ys.min()), int(xs.min()), int(ys.max()), int(xs.max()))
        self.perimeter = float(perimeter)

    def __repr__(self):
        return f"Component(label={self.label}, area={self.area}, centroid_xy={self.centroid_xy})"


class ComponentSet:
    def __init__(self, shape: tuple[int, int], components: list[Component]):
        self.shape = shape
        self.components = tuple(components)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def areas(self) -> np.ndarray:
        return np.array([c.area for c in self.components], dtype=np.int64)


# Moore neighborhood in clockwise order starting west, for contour tracing.
_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))


def _contour_chain_length(window: np.ndarray) -> float:
    """Outer 8-connected contour length of a single component (axial 1, diagonal sqrt 2).

    Moore tracing from the uppermost-leftmost pixel; terminates when the
    (pixel, entry-direction) state repeats. Interior holes are ignored.
    """
    ys, xs = np.nonzero(window)
    if len(ys) == 1:
        return 0.0
    start = (int(ys[0]), int(xs[0]))
    H, W = window.shape

    def fg(p):
        return 0 <= p[0] < H and 0 <= p[1] < W and window[p]

    length = 0.0
    cur = start
    # backtrack starts due west of the start pixel (guaranteed background
    # for the uppermost-leftmost foreground pixel of the component)
    back_dir = 0
    seen: dict = {}
    while True:
        state = (cur, back_dir)
        if state in seen:
            # length of the recurrent contour cycle, excluding any lead-in move
            return length - seen[state]
        seen[state] = length
        nxt = None
        for k in range(1, 9):
            d = (back_dir + k) % 8
            p = (cur[0] + _MOORE[d][0], cur[1] + _MOORE[d][1])
            if fg(p):
                nxt = p
                # new backtrack points from nxt toward the cell just before p
                prev = (back_dir + k - 1) % 8
                back_cell = (cur[0] + _MOORE[prev][0], cur[1] + _MOORE[prev][1])
                ddy = back_cell[0] - p[0]
                ddx = back_cell[1] - p[1]
                for j, off in enumerate(_MOORE):
                    if off == (ddy, ddx):
                        back_dir = j
                        break
                break
        if nxt is None:
            return 0.0  # isolated pixel, handled above; defensive
        length += 1.0 if (nxt[0] == cur[0] or nxt[1] == cur[1]) else np.sqrt(2.0)
        cur = nxt


def connected_components(m: np.ndarray, connectivity: int = 8) -> ComponentSet:
    """Label a mask; components ordered by minimum row-major pixel index."""
    m = as_mask(m)
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    lbl, n = ndimage.label(m, structure=_STRUCT[connectivity])
    if n == 0:
        return ComponentSet(m.shape, [])
    order_vals, first_idx = np.unique(lbl.ravel(), return_index=True)
    pairs = [(int(first_idx[i]), int(v)) for i, v in enumerate(order_vals) if v != 0]
    pairs.sort()
    slices = ndimage.find_objects(lbl)
    comps = []
    for new_label, (_, old) in enumerate(pairs, start=1):
        sl = slices[old - 1]
        local = lbl[sl] == old
        pix = np.argwhere(local).astype(np.int64)
        pix[:, 0] += sl[0].start
        pix[:, 1] += sl[1].start
        perim = _contour_chain_length(local)
        comps.append(Component(new_label, pix, perim))
    return ComponentSet(m.shape, comps)


def distance_transform(m: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance to the nearest background pixel (border = background)."""
    m = as_mask(m)
    padded = np.pad(m, 1)
    d = ndimage.distance_transform_edt(padded)
    return np.ascontiguousarray(d[1:-1, 1:-1])


def skeletonize(m: np.ndarray) -> np.ndarray:
    """Reduce a mask to single-pixel centerlines.

    Output is a subset of the input and preserves its 8-connected component
    count; no pixel of the result has a 2x2 all-foreground block in its
    neighborhood except for irreducible junction cores whose removal would
    split a component (such cores cannot be thinned by any subset operation).
    """
    m = as_mask(m)
    if not m.any():
        return m.copy()
    return _thin.thin(m)


def has_blocks(m: np.ndarray) -> bool:
    """True if any 2x2 all-foreground block exists."""
    m = as_mask(m)
    return bool(np.any(m[:-1, :-1] & m[:-1, 1:] & m[1:, :-1] & m[1:, 1:]))


def crush_blocks(m: np.ndarray) -> np.ndarray:
    """Forcibly break residual 2x2 blocks for graph extraction.

    Deletes the block pixel with the fewest foreground neighbors (row-major
    tie-break) regardless of connectivity, so the result may split a
    component in degenerate junction cores. Use only where a guaranteed-thin
    raster matters more than exact connectivity, e.g. spur counting.
    """
    m = as_mask(m).copy()
    while True:
        blocks = np.argwhere(m[:-1, :-1] & m[:-1, 1:] & m[1:, :-1] & m[1:, 1:])
        if len(blocks) == 0:
            return m
        y, x = blocks[0]
        best = None
        for by, bx in ((y, x), (y, x + 1), (y + 1, x), (y + 1, x + 1)):
            y0, y1 = max(by - 1, 0), min(by + 2, m.shape[0])
            x0, x1 = max(bx - 1, 0), min(bx + 2, m.shape[1])
            n = int(m[y0:y1, x0:x1].sum()) - 1
            if best is None or n < best[0]:
                best = (n, by, bx)
        m[best[1], best[2]] = False


def boundary_pixels(m: np.ndarray) -> np.ndarray:
    """Foreground pixels with a background 4-neighbor (border = background), row-major."""
    m = as_mask(m)
    p = np.pad(m, 1)
    nb_bg = (~p[:-2, 1:-1]) | (~p[2:, 1:-1]) | (~p[1:-1, :-2]) | (~p[1:-1, 2:])
    return np.argwhere(m & nb_bg).astype(np.int64)


def _row_extremes(points_xy: np.ndarray) -> np.ndarray:
    """Leftmost and rightmost point of every row; only these can be hull
    vertices, which caps the chain input at 2 x height instead of the area."""
    order = np.lexsort((points_xy[:, 0], points_xy[:, 1]))
    pts = points_xy[order]
    new_row = pts[1:, 1] != pts[:-1, 1]
    first = np.r_[True, new_row]
    last = np.r_[new_row, True]
    return pts[first | last]


def _hull_vertices(points_xy: np.ndarray) -> np.ndarray:
    """Convex hull (monotone chain) of integer (x, y) points, counterclockwise
    in image coordinates (y down); collinear points dropped."""
    pts = np.unique(_row_extremes(points_xy), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=np.int64)


def _fill_convex(verts_xy: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Rasterize a convex polygon with integer vertices: pixel centers inside
    or on the boundary. Exact integer arithmetic throughout."""
    H, W = shape
    out = np.zeros(shape, dtype=bool)
    n = len(verts_xy)
    if n == 0:
        return out
    if n == 1:
        x, y = verts_xy[0]
        out[y, x] = True
        return out
    if n == 2:
        (x1, y1), (x2, y2) = verts_xy
        g = int(np.gcd(abs(int(x2) - int(x1)), abs(int(y2) - int(y1))))
        if g == 0:
            out[y1, x1] = True
            return out
        sx = (int(x2) - int(x1)) // g
        sy = (int(y2) - int(y1)) // g
        for k in range(g + 1):
            out[y1 + k * sy, x1 + k * sx] = True
        return out

    vy = verts_xy[:, 1]
    y_lo, y_hi = max(int(vy.min()), 0), min(int(vy.max()), H - 1)
    if y_lo > y_hi:
        return out
    ys = np.arange(y_lo, y_hi + 1, dtype=np.int64)
    lo = np.zeros(len(ys), dtype=np.int64)
    hi = np.full(len(ys), W - 1, dtype=np.int64)
    feasible = np.ones(len(ys), dtype=bool)
    for i in range(n):
        xa, ya = int(verts_xy[i, 0]), int(verts_xy[i, 1])
        xb, yb = int(verts_xy[(i + 1) % n, 0]), int(verts_xy[(i + 1) % n, 1])
        # interior satisfies cross((b-a),(p-a)) >= 0 for every edge of a
        # counterclockwise polygon in y-down coordinates
        a = yb - ya                        # coefficient of -x
        rhs = (xb - xa) * (ys - ya) + a * xa
        # constraint: (xb-xa)(y-ya) - (yb-ya)(x-xa) >= 0  <=>  a*x <= rhs
        if a > 0:
            np.minimum(hi, rhs // a, out=hi)  # x <= floor(rhs / a)
        elif a < 0:
            np.maximum(lo, -((-rhs) // a), out=lo)  # x >= ceil(rhs / a)
        else:
            feasible &= rhs >= 0
    rows = feasible & (lo <= hi)
    cols = np.arange(W, dtype=np.int64)
    out[y_lo:y_hi + 1] = rows[:, None] & (cols >= lo[:, None]) & (cols <= hi[:, None])
    return out


def convex_hull_mask(m: np.ndarray) -> np.ndarray:
    """Filled rasterization of the convex hull of foreground pixel centers."""
    m = as_mask(m)
    pix = np.argwhere(m)
    if len(pix) == 0:
        raise EmptyMask("convex hull of an empty mask")
    pts_xy = pix[:, ::-1].astype(np.int64)
    verts = _hull_vertices(pts_xy)
    return _fill_convex(verts, m.shape)


def hull_polygon_xy(m: np.ndarray) -> np.ndarray:
    """Convex hull vertices of foreground pixel centers as (K, 2) int (x, y), CCW."""
    m = as_mask(m)
    pix = np.argwhere(m)
    if len(pix) == 0:
        raise EmptyMask("convex hull of an empty mask")
    return _hull_vertices(pix[:, ::-1].astype(np.int64))


def otsu_threshold(gray: np.ndarray, bins: int = 256) -> float:
    """Otsu's threshold over [0, 1]; returns the upper edge of the chosen bin."""
    hist, edges = np.histogram(np.clip(gray, 0.0, 1.0), bins=bins, range=(0.0, 1.0))
    total = hist.sum()
    if total == 0:
        return 0.0
    centers = (edges[:-1] + edges[1:]) / 2.0
    w0 = np.cumsum(hist)
    w1 = total - w0
    mu = np.cumsum(hist * centers)
    mu_t = mu[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        m0 = mu / w0
        m1 = (mu_t - mu) / w1
        between = w0 * w1 * (m0 - m1) ** 2
    between[~np.isfinite(between)] = -1.0
    k = int(np.argmax(between))
    return float(edges[k + 1])


def estimate_fov(gray: np.ndarray, *, threshold_floor: float = 0.05, min_fraction: float = 0.10) -> np.ndarray:
    """Estimate the analyzable field of view from a luminance raster in [0, 1].

    Thresholds at max(Otsu, floor), keeps the largest 8-connected region and
    fills its convex hull.
    """
    g = np.asarray(gray, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError(f"luminance raster must be 2D, got {g.shape}")
    if g.size and (g.min() < -1e-9 or g.max() > 1 + 1e-9):
        raise ValueError("luminance values must lie in [0, 1]")
    thr = max(otsu_threshold(g), threshold_floor)
    fg = g > thr
    if fg.sum() < min_fraction * g.size:
        raise NoFOV(f"foreground fraction {fg.sum() / max(g.size, 1):.3f} below {min_fraction}")
    comps = connected_components(fg, 8)
    largest = max(comps, key=lambda c: (c.area, -c.label))
    region = np.zeros(g.shape, dtype=bool)
    region[largest.pixels[:, 0], largest.pixels[:, 1]] = True
    return convex_hull_mask(region)


def require_thin(s: np.ndarray) -> np.ndarray:
    """Validate that a mask carries no 2x2 all-foreground block."""
    s = as_mask(s)
    if has_blocks(s):
        raise NotThin("2x2 foreground block present")
    return s
