"""Independent reference implementations used to cross-check the library.

Everything here trades speed for obviousness: nested loops, exhaustive
pairwise distances, direct formula evaluation. None of it shares code with
the package under test.
"""

import math

import numpy as np


# ---------------------------------------------------------------------------
# overlap metrics from raw pixel counts

def pixel_counts(pred, gt):
    """(tp, fp, fn) by looping over every pixel."""
    tp = fp = fn = 0
    h, w = pred.shape
    for y in range(h):
        for x in range(w):
            p = bool(pred[y, x])
            g = bool(gt[y, x])
            if p and g:
                tp += 1
            elif p:
                fp += 1
            elif g:
                fn += 1
    return tp, fp, fn


def dsc_oracle(pred, gt):
    tp, fp, fn = pixel_counts(pred, gt)
    if tp + fp + fn == 0:
        return 1.0
    return 2 * tp / (2 * tp + fp + fn)


def jac_oracle(pred, gt):
    tp, fp, fn = pixel_counts(pred, gt)
    if tp + fp + fn == 0:
        return 1.0
    return tp / (tp + fp + fn)


def precision_oracle(pred, gt):
    """None when the prediction has no positives."""
    tp, fp, _ = pixel_counts(pred, gt)
    if tp + fp == 0:
        return None
    return tp / (tp + fp)


# ---------------------------------------------------------------------------
# boundary distances

def boundary_points(m):
    """Foreground pixels with a 4-neighbor outside the mask, as (y, x) tuples."""
    h, w = m.shape
    pts = []
    for y in range(h):
        for x in range(w):
            if not m[y, x]:
                continue
            for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                ny, nx = y + dy, x + dx
                if ny < 0 or ny >= h or nx < 0 or nx >= w or not m[ny, nx]:
                    pts.append((y, x))
                    break
    return pts


def percentile_linear(values, q):
    """q-th percentile with linear interpolation between order statistics."""
    a = sorted(values)
    if len(a) == 1:
        return float(a[0])
    rank = q / 100.0 * (len(a) - 1)
    lo = int(math.floor(rank))
    frac = rank - lo
    if lo + 1 >= len(a):
        return float(a[-1])
    return float(a[lo] + frac * (a[lo + 1] - a[lo]))


def hd95_oracle(pred, gt):
    """Exhaustive pairwise boundary distances, pooled, 95th percentile."""
    bp = boundary_points(pred)
    bg = boundary_points(gt)
    if not bp and not bg:
        return 0.0
    if not bp or not bg:
        return None
    pooled = []
    for (y, x) in bp:
        pooled.append(min(math.hypot(y - gy, x - gx) for gy, gx in bg))
    for (gy, gx) in bg:
        pooled.append(min(math.hypot(y - gy, x - gx) for y, x in bp))
    return percentile_linear(pooled, 95.0)


def max_directed_hausdorff(pred, gt):
    bp = boundary_points(pred)
    bg = boundary_points(gt)
    if not bp or not bg:
        return None
    d1 = max(min(math.hypot(y - gy, x - gx) for gy, gx in bg) for y, x in bp)
    d2 = max(min(math.hypot(y - gy, x - gx) for y, x in bp) for gy, gx in bg)
    return max(d1, d2)


def edt_oracle(m):
    """Per-pixel distance to the nearest background pixel, image border counting
    as background; brute force over every background location."""
    h, w = m.shape
    bg = [(y, x) for y in range(h) for x in range(w) if not m[y, x]]
    out = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            if not m[y, x]:
                continue
            best = min(y + 1, h - y, x + 1, w - x)  # straight to the border
            for by, bx in bg:
                d = math.hypot(y - by, x - bx)
                if d < best:
                    best = d
            out[y, x] = best
    return out


# ---------------------------------------------------------------------------
# vessel caliber pairing

def knudtson_oracle(widths, coeff):
    """Direct evaluation of the 6 -> 3 -> 2 -> 1 pairing.

    Sort descending; combine largest with smallest as c*sqrt(w1^2 + w2^2);
    an odd stage carries its middle element unchanged.
    """
    w = sorted((float(v) for v in widths), reverse=True)
    if len(w) != 6:
        raise ValueError("oracle expects exactly six widths")
    while len(w) > 1:
        stage = []
        k = len(w)
        for i in range(k // 2):
            stage.append(coeff * math.sqrt(w[i] ** 2 + w[k - 1 - i] ** 2))
        if k % 2:
            stage.append(w[k // 2])
        w = sorted(stage, reverse=True)
    return w[0]


# ---------------------------------------------------------------------------
# connected components by explicit flood fill

def flood_components(m, connectivity=8):
    """List of sets of (y, x) pixels, one per component."""
    h, w = m.shape
    if connectivity == 8:
        nbrs = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        nbrs = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    seen = set()
    comps = []
    for y in range(h):
        for x in range(w):
            if not m[y, x] or (y, x) in seen:
                continue
            stack = [(y, x)]
            seen.add((y, x))
            comp = set()
            while stack:
                cy, cx = stack.pop()
                comp.add((cy, cx))
                for dy, dx in nbrs:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < h and 0 <= nx < w and m[ny, nx] and (ny, nx) not in seen:
                        seen.add((ny, nx))
                        stack.append((ny, nx))
            comps.append(comp)
    return comps


# ---------------------------------------------------------------------------
# image moments

def orientation_oracle(mask):
    """Principal-axis angle in degrees, y measured upward, in [-90, 90)."""
    ys, xs = np.nonzero(mask)
    x = xs.astype(float) - xs.mean()
    y = -(ys.astype(float) - ys.mean())
    mu20 = float((x * x).sum())
    mu02 = float((y * y).sum())
    mu11 = float((x * y).sum())
    deg = math.degrees(0.5 * math.atan2(2.0 * mu11, mu20 - mu02))
    return (deg + 90.0) % 180.0 - 90.0


# ---------------------------------------------------------------------------
# misc geometry

def polygon_area(verts_xy):
    """Shoelace area of a closed polygon given as (x, y) rows."""
    v = np.asarray(verts_xy, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def union_area_oracle(masks):
    """Union pixel count via inclusion-exclusion on per-pixel max."""
    acc = np.zeros(masks[0].shape, dtype=bool)
    for m in masks:
        acc |= m.astype(bool)
    return int(acc.sum())
