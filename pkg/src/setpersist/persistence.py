"""Sublevel-set persistent homology of 2-d scalar fields (dims 0 and 1).

Dimension 0 runs union-find with the elder rule over pixels processed in
increasing value order under 4-connectivity.  Dimension 1 is computed by
duality: the same union-find runs on the negated field under
8-connectivity, augmented with a virtual node adjacent to every border
pixel, and each superlevel pair (b*, d*) maps to the sublevel pair
(-d*, -b*).  The virtual node is the unique survivor of the dual pass,
so background components that still touch the window border are never
reported as holes.

Equal-valued 4-connected (resp. 8-connected) plateaus are contracted to
single nodes before the sweep, so a local-minimum plateau spawns exactly
one component and ties cannot produce spurious pairs; remaining ties
between distinct plateaus are broken by smallest row-major pixel index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import ndimage, sparse
from scipy.sparse.csgraph import connected_components

from .distance import ScalarField
from .raster import BinaryRaster

_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class PersistencePoint:
    dim: int
    birth: float
    death: float
    multiplicity: int = 1
    essential: bool = False

    def __post_init__(self):
        if self.death < self.birth:
            raise ValueError("death must be >= birth")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")

    @property
    def lifetime(self) -> float:
        return self.death - self.birth

    @property
    def meanage(self) -> float:
        return 0.5 * (self.birth + self.death)


class PersistenceDiagram:
    """Multiset of (dim, birth, death) points with multiplicities."""

    def __init__(self, points, field_min: float, field_max: float):
        points = tuple(points)
        ess0 = [p for p in points if p.essential and p.dim == 0]
        if len(ess0) != 1 or ess0[0].birth != field_min:
            raise ValueError("need exactly one essential dim-0 point born at field_min")
        for p in points:
            if p.birth < field_min or p.death > field_max:
                raise ValueError("point outside [field_min, field_max]")
        self.points = points
        self.field_min = float(field_min)
        self.field_max = float(field_max)

    def dim_arrays(self, q: int):
        """(births, deaths, multiplicities, essential) arrays for dim q."""
        pts = [p for p in self.points if p.dim == q]
        b = np.array([p.birth for p in pts], dtype=np.float64)
        d = np.array([p.death for p in pts], dtype=np.float64)
        c = np.array([p.multiplicity for p in pts], dtype=np.int64)
        e = np.array([p.essential for p in pts], dtype=bool)
        return b, d, c, e


@njit(cache=True)
def _uf_find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _elder_pairs(values, indptr, indices):
    """Elder-rule pairs over nodes processed in index order.

    ``values`` must be non-decreasing and index order must break ties the
    way the caller wants: the component rooted at the smaller index is
    the elder in every merge.  Returns (births, deaths, count).
    """
    n = values.shape[0]
    parent = np.empty(n, np.int64)
    births = np.empty(n, np.float64)
    deaths = np.empty(n, np.float64)
    m = 0
    for k in range(n):
        parent[k] = k
        cur = -1
        for e in range(indptr[k], indptr[k + 1]):
            w = indices[e]
            if w >= k:
                continue  # not processed yet
            r = _uf_find(parent, w)
            if cur == -1:
                cur = r
            elif r != cur:
                elder = min(r, cur)
                younger = max(r, cur)
                births[m] = values[younger]
                deaths[m] = values[k]
                m += 1
                parent[younger] = elder
                cur = elder
        if cur != -1:
            parent[k] = cur
    return births[:m], deaths[:m], m


def _plateau_graph(values: np.ndarray, eight: bool, virtual_border: bool):
    """Contract equal-valued plateaus and order them for the sweep.

    Returns (node_values, indptr, indices) where node 0 is the virtual
    border node when requested (value -inf), and nodes are sorted by
    (value, smallest row-major pixel index).
    """
    nx, ny = values.shape
    n = values.size
    v = values.ravel()  # flat index p = i * ny + j
    idx = np.arange(n).reshape(nx, ny)

    offsets = [(1, 0), (0, 1)]
    if eight:
        offsets += [(1, 1), (1, -1)]
    pa, pb = [], []
    for di, dj in offsets:
        a = idx[: nx - di if di else nx, max(0, -dj) : ny - dj if dj > 0 else ny]
        b = idx[di:, max(0, dj) : ny + dj if dj < 0 else ny]
        pa.append(a.ravel())
        pb.append(b.ravel())
    pa = np.concatenate(pa)
    pb = np.concatenate(pb)

    eq = v[pa] == v[pb]
    graph = sparse.coo_matrix(
        (np.ones(eq.sum(), dtype=np.int8), (pa[eq], pb[eq])), shape=(n, n)
    )
    nz, labels = connected_components(graph, directed=False)

    zone_value = np.empty(nz, dtype=np.float64)
    zone_value[labels] = v
    zone_first = np.full(nz, n, dtype=np.int64)
    np.minimum.at(zone_first, labels, np.arange(n))

    za = labels[pa[~eq]]
    zb = labels[pb[~eq]]

    order = np.lexsort((zone_first, zone_value))
    rank = np.empty(nz, dtype=np.int64)
    shift = 1 if virtual_border else 0
    rank[order] = np.arange(nz) + shift

    src = np.concatenate([rank[za], rank[zb]])
    dst = np.concatenate([rank[zb], rank[za]])
    if virtual_border:
        border = np.zeros((nx, ny), dtype=bool)
        border[0, :] = border[-1, :] = True
        border[:, 0] = border[:, -1] = True
        bz = np.unique(rank[labels[idx[border]]])
        src = np.concatenate([src, bz, np.zeros(len(bz), dtype=np.int64)])
        dst = np.concatenate([dst, np.zeros(len(bz), dtype=np.int64), bz])

    n_nodes = nz + shift
    key = src * n_nodes + dst
    key = np.unique(key)
    src = key // n_nodes
    dst = key % n_nodes

    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    indices = dst.astype(np.int64)

    node_values = np.empty(n_nodes, dtype=np.float64)
    if virtual_border:
        node_values[0] = -np.inf
    node_values[shift:] = zone_value[order]
    return node_values, indptr, indices


def _aggregate(dim, births, deaths, essential=()):
    pts = []
    if len(births):
        arr = np.stack([births, deaths], axis=1)
        uniq, counts = np.unique(arr, axis=0, return_counts=True)
        for (b, d), c in zip(uniq, counts):
            pts.append(PersistencePoint(dim, float(b), float(d), int(c)))
    pts.extend(essential)
    return pts


def sublevel_persistence(field: ScalarField) -> PersistenceDiagram:
    """Persistence diagram of the sublevel filtration of a scalar field."""
    values = field.values
    fmin = float(values.min())
    fmax = float(values.max())

    nv, indptr, indices = _plateau_graph(values, eight=False, virtual_border=False)
    b0, d0, _ = _elder_pairs(nv, indptr, indices)
    essential0 = PersistencePoint(0, fmin, fmax, 1, essential=True)
    points = _aggregate(0, b0, d0, [essential0])

    nv, indptr, indices = _plateau_graph(-values, eight=True, virtual_border=True)
    bs, ds, _ = _elder_pairs(nv, indptr, indices)
    points += _aggregate(1, -ds, -bs)

    return PersistenceDiagram(points, fmin, fmax)


def betti_counts(pd: PersistenceDiagram, r: float) -> tuple[int, int]:
    """(beta_0, beta_1) of the sublevel set at threshold r, from the diagram."""
    out = []
    for q in (0, 1):
        b, d, c, e = pd.dim_arrays(q)
        alive = np.where(e, b <= r, (b <= r) & (r < d))
        out.append(int(c[alive].sum()))
    return out[0], out[1]


def euler_characteristic(raster: BinaryRaster) -> int:
    """Components minus holes of the foreground.

    Components under 4-connectivity; holes are 8-connected background
    components that do not touch the raster border.
    """
    fg = raster.cells
    _, n_comp = ndimage.label(fg, structure=_FOUR)
    bg_labels, n_bg = ndimage.label(~fg, structure=_EIGHT)
    border = np.concatenate(
        [bg_labels[0, :], bg_labels[-1, :], bg_labels[:, 0], bg_labels[:, -1]]
    )
    touching = np.unique(border[border > 0])
    return int(n_comp) - int(n_bg - len(touching))


def write_diagram_csv(pd: PersistenceDiagram, path) -> None:
    with open(path, "w") as fh:
        fh.write("dim,birth,death,multiplicity,essential\n")
        for p in sorted(pd.points, key=lambda p: (p.dim, p.birth, p.death)):
            fh.write(
                "%d,%s,%s,%d,%d\n"
                % (p.dim, format(p.birth, ".17g"), format(p.death, ".17g"),
                   p.multiplicity, int(p.essential))
            )


def read_diagram_csv(path) -> PersistenceDiagram:
    pts = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "dim,birth,death,multiplicity,essential":
            raise ValueError("unexpected diagram CSV header")
        for line in fh:
            dim, b, d, c, e = line.strip().split(",")
            pts.append(
                PersistencePoint(int(dim), float(b), float(d), int(c), bool(int(e)))
            )
    fmin = min(p.birth for p in pts)
    fmax = max(p.death for p in pts)
    return PersistenceDiagram(pts, fmin, fmax)
