"""Skeleton graph extraction: branches, junctions, endpoints.

A junction is a maximal 8-connected cluster of skeleton pixels with three or
more skeleton neighbors. Branches are maximal junction-free paths; each
carries its pixel chain, a polyline extended to the junction pixels it
attaches to (so arm lengths measure from the junction center outward), an
arc length (axial step 1, diagonal step sqrt 2) and per-chain-pixel radius
samples taken from the distance transform.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import NotThin, ShapeMismatch
from .raster import as_mask, has_blocks

_N8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass(frozen=True, eq=False)
class Node:
    id: int
    kind: str  # "endpoint" | "junction"
    pixels: np.ndarray  # (K, 2) int (row, col)

    @property
    def center(self) -> tuple[float, float]:
        return (float(self.pixels[:, 0].mean()), float(self.pixels[:, 1].mean()))


@dataclass(frozen=True, eq=False)
class Branch:
    id: int
    pixels: np.ndarray    # (K, 2) int chain pixels, junction pixels excluded
    points: np.ndarray    # (M, 2) float polyline incl. junction attachment pixels
    arc_length: float
    radii: np.ndarray     # EDT value per chain pixel
    closed: bool
    end_kinds: tuple[str, str]  # endpoint | junction | cycle

    @property
    def chord_length(self) -> float:
        d = self.points[-1] - self.points[0]
        return float(np.hypot(d[0], d[1]))

    @property
    def touches_endpoint(self) -> bool:
        return "endpoint" in self.end_kinds


@dataclass(frozen=True, eq=False)
class SkeletonGraph:
    shape: tuple[int, int]
    nodes: tuple[Node, ...]
    branches: tuple[Branch, ...]

    @property
    def n_junctions(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "junction")

    @property
    def n_endpoints(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "endpoint")


def _polyline_arc(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    d = np.diff(points.astype(np.float64), axis=0)
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def skeleton_graph(s: np.ndarray, edt: np.ndarray) -> SkeletonGraph:
    """Decompose a thin skeleton into nodes and branches."""
    s = as_mask(s)
    edt = np.asarray(edt, dtype=np.float64)
    if edt.shape != s.shape:
        raise ShapeMismatch(f"skeleton {s.shape} vs edt {edt.shape}")
    if has_blocks(s):
        raise NotThin("2x2 foreground block in skeleton")
    H, W = s.shape

    # 8-neighbor degree of every skeleton pixel
    kernel = np.ones((3, 3), dtype=np.uint8)
    kernel[1, 1] = 0
    deg = ndimage.convolve(s.astype(np.uint8), kernel, mode="constant", cval=0)
    deg[~s] = 0

    junction = s & (deg >= 3)
    jlbl, n_j = ndimage.label(junction, structure=np.ones((3, 3), dtype=bool))

    nodes: list[Node] = []
    cluster_node: dict[int, int] = {}
    if n_j:
        order, first = np.unique(jlbl.ravel(), return_index=True)
        pairs = sorted((int(first[i]), int(v)) for i, v in enumerate(order) if v != 0)
        for _, old in pairs:
            pix = np.argwhere(jlbl == old).astype(np.int64)
            cluster_node[old] = len(nodes)
            nodes.append(Node(len(nodes), "junction", pix))

    def neighbors(y, x):
        for dy, dx in _N8:
            ny, nx = y + dy, x + dx
            if 0 <= ny < H and 0 <= nx < W and s[ny, nx]:
                yield ny, nx

    endpoint_node: dict[tuple[int, int], int] = {}

    def node_for_endpoint(p):
        if p not in endpoint_node:
            endpoint_node[p] = len(nodes)
            nodes.append(Node(len(nodes), "endpoint", np.array([p], dtype=np.int64)))
        return endpoint_node[p]

    visited = np.zeros_like(s)  # chain pixels consumed by a branch
    branches: list[Branch] = []

    def trace(start, prev_is_junction_pixel):
        """Follow a degree<=2 chain from ``start``; returns (chain, terminal kind, terminal junction pixel)."""
        chain = [start]
        visited[start] = True
        prev = prev_is_junction_pixel
        cur = start
        while True:
            nxts = []
            for nb in neighbors(*cur):
                if nb == prev:
                    continue
                if junction[nb]:
                    return chain, "junction", nb
                if not visited[nb]:
                    nxts.append(nb)
            if not nxts:
                return chain, "endpoint", None
            # thin skeleton: at most one unvisited non-junction continuation,
            # except at the closing step of a cycle; fixed scan order breaks ties
            nxt = nxts[0]
            visited[nxt] = True
            chain.append(nxt)
            prev = cur
            cur = nxt

    def add_branch(chain, heads, kinds, closed=False):
        pts = [heads[0]] if heads[0] is not None else []
        pts += chain
        if heads[1] is not None:
            pts.append(heads[1])
        points = np.array(pts, dtype=np.float64)
        pix = np.array(chain, dtype=np.int64)
        arc = _polyline_arc(points)
        if closed and len(points) >= 2:
            d = points[0] - points[-1]
            arc += float(np.hypot(d[0], d[1]))
        branches.append(Branch(
            id=len(branches),
            pixels=pix,
            points=points,
            arc_length=arc,
            radii=edt[pix[:, 0], pix[:, 1]] if len(pix) else np.empty(0),
            closed=closed,
            end_kinds=kinds,
        ))

    # 1) branches leaving junction clusters, clusters in id order,
    #    exits in row-major pixel then scan-neighbor order
    for node in [n for n in nodes if n.kind == "junction"]:
        for jy, jx in node.pixels.tolist():
            for nb in neighbors(jy, jx):
                if junction[nb] or visited[nb]:
                    continue
                chain, kind, jpix = trace(nb, (jy, jx))
                if kind == "junction":
                    add_branch(chain, [(jy, jx), jpix], ("junction", "junction"))
                else:
                    tail = chain[-1]
                    node_for_endpoint(tail)
                    add_branch(chain, [(jy, jx), None], ("junction", "endpoint"))

    # 2) junction-free paths: start from unvisited true endpoints (deg <= 1)
    ys, xs = np.nonzero(s & (deg <= 1) & ~junction)
    for y, x in zip(ys.tolist(), xs.tolist()):
        if visited[y, x]:
            continue
        node_for_endpoint((y, x))
        chain, kind, jpix = trace((y, x), None)
        if kind == "junction":  # defensive; junction arms are consumed above
            add_branch(chain, [None, jpix], ("endpoint", "junction"))
        else:
            if len(chain) > 1:
                node_for_endpoint(chain[-1])
            add_branch(chain, [None, None], ("endpoint", "endpoint"))

    # 3) leftover degree-2 pixels form pure cycles; anchor at min row-major
    ys, xs = np.nonzero(s & ~visited & ~junction)
    for y, x in zip(ys.tolist(), xs.tolist()):
        if visited[y, x]:
            continue
        chain, kind, jpix = trace((y, x), None)
        add_branch(chain, [None, None], ("cycle", "cycle"), closed=True)

    return SkeletonGraph(s.shape, tuple(nodes), tuple(branches))
