"""Raster core: oracle equivalence and geometric fixtures."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from fundusquant import raster
from fundusquant.errors import EmptyMask, NoFOV, NotThin


# ---------------------------------------------------------------- oracles


def flood_fill_components(m: np.ndarray, connectivity: int) -> list[set]:
    """Independent BFS labeling oracle."""
    if connectivity == 8:
        offs = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        offs = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    H, W = m.shape
    seen = np.zeros_like(m, dtype=bool)
    comps = []
    for y in range(H):
        for x in range(W):
            if m[y, x] and not seen[y, x]:
                comp = set()
                stack = [(y, x)]
                seen[y, x] = True
                while stack:
                    cy, cx = stack.pop()
                    comp.add((cy, cx))
                    for dy, dx in offs:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < H and 0 <= nx < W and m[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            stack.append((ny, nx))
                comps.append(comp)
    return comps


def brute_edt(m: np.ndarray) -> np.ndarray:
    """O(N^2) nearest-background scan, border ring included as background."""
    H, W = m.shape
    padded = np.pad(m, 1)
    bg = np.argwhere(~padded).astype(np.float64)
    out = np.zeros((H, W))
    for y in range(H):
        for x in range(W):
            if m[y, x]:
                d = np.sqrt(((bg - (y + 1, x + 1)) ** 2).sum(axis=1))
                out[y, x] = d.min()
    return out


def brute_boundary(m: np.ndarray) -> set:
    H, W = m.shape
    out = set()
    for y in range(H):
        for x in range(W):
            if not m[y, x]:
                continue
            for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                ny, nx = y + dy, x + dx
                if not (0 <= ny < H and 0 <= nx < W) or not m[ny, nx]:
                    out.add((y, x))
                    break
    return out


def n_components(m: np.ndarray, connectivity: int = 8) -> int:
    return len(flood_fill_components(m, connectivity))


masks_16 = hnp.arrays(bool, (16, 16), elements=st.booleans())


# -------------------------------------------------------- connected components


def test_components_isolated_pixels():
    m = np.zeros((3, 3), bool)
    m[0, 0] = m[2, 2] = True
    cs = raster.connected_components(m, 8)
    assert len(cs) == 2
    assert all(c.area == 1 for c in cs)


def test_components_diagonal_adjacency():
    m = np.zeros((3, 3), bool)
    m[0, 0] = m[1, 1] = True
    assert len(raster.connected_components(m, 8)) == 1
    assert len(raster.connected_components(m, 4)) == 2


def test_components_empty():
    cs = raster.connected_components(np.zeros((4, 4), bool))
    assert len(cs) == 0


def test_components_ordering_row_major():
    m = np.zeros((5, 5), bool)
    m[4, 0] = True  # later in row-major order
    m[0, 4] = True
    cs = raster.connected_components(m, 8)
    assert [tuple(c.pixels[0]) for c in cs] == [(0, 4), (4, 0)]
    assert [c.label for c in cs] == [1, 2]


@settings(max_examples=60, deadline=None)
@given(masks_16, st.sampled_from([4, 8]))
def test_components_match_flood_fill_oracle(m, conn):
    got = raster.connected_components(m, conn)
    want = flood_fill_components(m, conn)
    got_sets = [set(map(tuple, c.pixels)) for c in got]
    assert sorted(map(sorted, got_sets)) == sorted(map(sorted, want))
    # ordering: by min row-major index
    firsts = [min(p[0] * m.shape[1] + p[1] for p in s) for s in got_sets]
    assert firsts == sorted(firsts)


def test_component_fields():
    m = np.zeros((4, 6), bool)
    m[1:3, 2:5] = True  # 2x3 box
    (c,) = raster.connected_components(m, 8)
    assert c.area == 6
    assert c.bbox == (1, 2, 2, 4)
    assert c.centroid_xy == (3.0, 1.5)


def test_perimeter_chain_values():
    one = np.zeros((3, 3), bool)
    one[1, 1] = True
    (c,) = raster.connected_components(one, 8)
    assert c.perimeter == 0.0

    domino = np.zeros((3, 4), bool)
    domino[1, 1:3] = True
    (c,) = raster.connected_components(domino, 8)
    assert c.perimeter == pytest.approx(2.0)

    square = np.zeros((5, 5), bool)
    square[1:4, 1:4] = True
    (c,) = raster.connected_components(square, 8)
    assert c.perimeter == pytest.approx(8.0)


# -------------------------------------------------------- distance transform


def test_edt_row_border_background():
    m = np.ones((1, 5), bool)
    assert np.allclose(raster.distance_transform(m), 1.0)


def test_edt_single_pixel():
    m = np.zeros((3, 3), bool)
    m[1, 1] = True
    assert raster.distance_transform(m)[1, 1] == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(hnp.arrays(bool, (12, 12), elements=st.booleans()))
def test_edt_matches_brute_force(m):
    got = raster.distance_transform(m)
    want = brute_edt(m)
    assert np.max(np.abs(got - want)) <= 1e-9


def test_edt_zero_exactly_on_background():
    rng = np.random.default_rng(7)
    m = rng.random((24, 24)) < 0.5
    d = raster.distance_transform(m)
    assert np.all(d[~m] == 0.0)
    assert np.all(d[m] > 0.0)


# -------------------------------------------------------------- skeletonize


def test_skeletonize_bar_gives_middle_row():
    m = np.zeros((9, 26), bool)
    m[3:6, 3:23] = True  # 3 px wide, 20 px long
    s = raster.skeletonize(m)
    ys, xs = np.nonzero(s)
    assert set(ys) == {4}, "centerline must sit in the middle row"
    assert n_components(s) == 1
    assert s[m].sum() == s.sum()  # subset


def test_skeletonize_single_pixel_and_empty():
    m = np.zeros((5, 5), bool)
    assert not raster.skeletonize(m).any()
    m[2, 2] = True
    assert np.array_equal(raster.skeletonize(m), m)


def test_skeletonize_preserves_1px_line():
    m = np.zeros((5, 20), bool)
    m[2, 1:19] = True
    assert np.array_equal(raster.skeletonize(m), m)


@settings(max_examples=60, deadline=None)
@given(masks_16)
def test_skeletonize_subset_count_idempotent(m):
    s = raster.skeletonize(m)
    assert not np.any(s & ~m)
    assert n_components(s) == n_components(m)
    assert np.array_equal(raster.skeletonize(s), s)


@pytest.mark.parametrize("shape_builder", [
    lambda: _bar((15, 40), 4, 8, 4, 36),
    lambda: _cross(31, 7),
    lambda: _disk(41, 14),
])
def test_skeletonize_structured_shapes_thin(shape_builder):
    m = shape_builder()
    s = raster.skeletonize(m)
    assert not raster.has_blocks(s)
    assert n_components(s) == n_components(m)


def _bar(shape, y0, y1, x0, x1):
    m = np.zeros(shape, bool)
    m[y0:y1, x0:x1] = True
    return m


def _cross(n, w):
    m = np.zeros((n, n), bool)
    c = n // 2
    m[c - w // 2:c + w // 2 + 1, 2:n - 2] = True
    m[2:n - 2, c - w // 2:c + w // 2 + 1] = True
    return m


def _disk(n, r):
    yy, xx = np.mgrid[:n, :n]
    c = n // 2
    return (yy - c) ** 2 + (xx - c) ** 2 <= r * r


# ------------------------------------------------------------- convex hull


def test_hull_rectangle_fixed_point():
    m = _bar((8, 9), 2, 6, 3, 8)
    assert np.array_equal(raster.convex_hull_mask(m), m)


def test_hull_covers_concavity():
    n = 41
    yy, xx = np.mgrid[:n, :n]
    c = n // 2
    rr = np.sqrt((yy - c) ** 2 + (xx - c) ** 2)
    arc = (np.abs(rr - 15) <= 1.5) & (xx <= c)  # "C" opening to the right
    hull = raster.convex_hull_mask(arc)
    assert np.all(hull[arc])
    assert hull.sum() > arc.sum() * 2


def test_hull_single_pixel():
    m = np.zeros((4, 4), bool)
    m[2, 1] = True
    assert np.array_equal(raster.convex_hull_mask(m), m)


def test_hull_empty_raises():
    with pytest.raises(EmptyMask):
        raster.convex_hull_mask(np.zeros((3, 3), bool))


def test_hull_collinear_diagonal():
    m = np.zeros((6, 6), bool)
    for k in (0, 2, 4):
        m[k, k] = True
    hull = raster.convex_hull_mask(m)
    want = np.zeros((6, 6), bool)
    for k in range(5):
        want[k, k] = True
    # integer points of the segment (0,0)-(4,4)
    assert np.array_equal(hull, want)


@settings(max_examples=40, deadline=None)
@given(masks_16)
def test_hull_matches_membership_oracle(m):
    if not m.any():
        return
    from scipy.spatial import Delaunay, QhullError

    got = raster.convex_hull_mask(m)
    pts = np.argwhere(m)[:, ::-1].astype(float)
    try:
        tri = Delaunay(pts)
    except QhullError:
        # degenerate (collinear) point set: oracle = exact segment membership
        assert np.all(got[m])
        assert raster.convex_hull_mask(got).sum() == got.sum()
        return
    H, W = m.shape
    grid = np.stack(np.meshgrid(np.arange(W), np.arange(H)), axis=-1).reshape(-1, 2)
    inside = tri.find_simplex(grid) >= 0
    want = inside.reshape(H, W)
    assert np.array_equal(got, want)


@settings(max_examples=30, deadline=None)
@given(masks_16)
def test_hull_idempotent_and_monotone(m):
    if not m.any():
        return
    h = raster.convex_hull_mask(m)
    assert np.all(h[m])
    assert np.array_equal(raster.convex_hull_mask(h), h)
    m2 = m.copy()
    m2[3:9, 3:9] = True
    h2 = raster.convex_hull_mask(m2)
    assert np.all(h2[h])


# ---------------------------------------------------------------- boundary


def test_boundary_square_perimeter():
    m = np.zeros((7, 7), bool)
    m[1:6, 1:6] = True
    b = raster.boundary_pixels(m)
    assert len(b) == 16
    inner = np.zeros((7, 7), bool)
    inner[2:5, 2:5] = True
    assert not any(inner[y, x] for y, x in b)


def test_boundary_single_pixel():
    m = np.zeros((3, 3), bool)
    m[1, 1] = True
    assert [tuple(p) for p in raster.boundary_pixels(m)] == [(1, 1)]


@settings(max_examples=40, deadline=None)
@given(masks_16)
def test_boundary_matches_brute_force(m):
    got = {tuple(p) for p in raster.boundary_pixels(m)}
    assert got == brute_boundary(m)


def test_boundary_border_counts_as_background():
    m = np.ones((4, 4), bool)
    assert len(raster.boundary_pixels(m)) == 12  # everything but the 2x2 core


# --------------------------------------------------------------------- FOV


def test_fov_bright_disk_area():
    n, R = 256, 100
    yy, xx = np.mgrid[:n, :n]
    disk = (yy - 128) ** 2 + (xx - 128) ** 2 <= R * R
    gray = np.where(disk, 0.8, 0.0)
    fov = raster.estimate_fov(gray)
    assert abs(fov.sum() - np.pi * R * R) <= 0.02 * np.pi * R * R


def test_fov_all_black_raises():
    with pytest.raises(NoFOV):
        raster.estimate_fov(np.zeros((32, 32)))


def test_fov_full_bright_full_frame():
    fov = raster.estimate_fov(np.full((32, 32), 0.9))
    assert fov.all()


def test_fov_threshold_floor():
    # dim vignette below the 0.05 floor must not join the FOV
    n = 64
    gray = np.full((n, n), 0.03)
    yy, xx = np.mgrid[:n, :n]
    disk = (yy - 32) ** 2 + (xx - 32) ** 2 <= 20 * 20
    gray[disk] = 0.5
    fov = raster.estimate_fov(gray)
    assert abs(fov.sum() - disk.sum()) < 0.05 * disk.sum()


# ----------------------------------------------------------------- NotThin


def test_require_thin():
    m = np.zeros((4, 4), bool)
    m[1:3, 1:3] = True
    with pytest.raises(NotThin):
        raster.require_thin(m)
    line = np.zeros((4, 4), bool)
    line[1, :] = True
    raster.require_thin(line)


def test_crush_blocks_removes_all_blocks():
    m = np.zeros((6, 6), bool)
    m[1:3, 1:3] = True
    m[3:5, 3:5] = True
    out = raster.crush_blocks(m)
    assert not raster.has_blocks(out)
    assert out.sum() >= m.sum() - 2
