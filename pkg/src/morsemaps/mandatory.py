"""Regions guaranteed to contain a local maximum of every realization.

Given pointwise envelope fields lower <= f_i <= upper, a region R around a
peak of the lower field is guaranteed as soon as the highest upper-bound
value on its boundary stays below the peak's lower-bound value: every
realization then attains a local maximum inside R. Each surviving peak gets
the smallest such region (the superlevel component of the lower field at
the highest guaranteeing level); peaks that never satisfy the test before
merging into an older component are not independently mandatory and are
absorbed. Regions therefore grow with the envelope width and eventually
swallow their neighbors, collapsing the count.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .grid import GridTopology, ScalarGrid, sos_order
from .persistence import superlevel_pairs
from .segmentation import Segmentation

__all__ = [
    "MandatoryMaximum",
    "mandatory_maxima",
    "label_member_maxima",
    "nearest_label_map",
    "cluster_maxima_fallback",
    "mandatory_to_json",
]

# 6-neighborhood structuring element matching GridTopology (diagonals on
# the main-diagonal direction only).
CONNECTIVITY = np.array([[1, 1, 0], [1, 1, 1], [0, 1, 1]], dtype=bool)


@dataclass(frozen=True)
class MandatoryMaximum:
    """One guaranteed maximum: labeled region plus its value interval.

    anchor is the peak vertex of the lower field; interval[0] is the merge
    value of the anchor's branch among surviving peaks, interval[1] the
    highest upper-bound value over the region. region_level is the lower
    field value defining the region's superlevel component.
    """

    label: int
    anchor: int
    interval: tuple[float, float]
    region: np.ndarray = field(repr=False)
    region_level: float = float("nan")

    def __post_init__(self):
        region = np.asarray(self.region, dtype=np.int64)
        region.setflags(write=False)
        object.__setattr__(self, "region", region)
        if self.interval[0] > self.interval[1]:
            raise ValueError(f"interval {self.interval} inverted")


def mandatory_maxima(
    lower: ScalarGrid,
    upper: ScalarGrid,
    topology: GridTopology,
    cleanup_persistence: float = 0.0,
) -> list[MandatoryMaximum]:
    """Extract all guaranteed maxima of the envelope [lower, upper].

    Peaks of the lower field whose merge persistence falls below
    cleanup_persistence are discarded up front. Labels are assigned in
    decreasing anchor-value order. Raises if the envelope is inverted
    anywhere.
    """
    if (lower.width, lower.height) != (upper.width, upper.height):
        raise ValueError("envelope grids must share dimensions")
    if (lower.width, lower.height) != (topology.width, topology.height):
        raise ValueError("grids and topology dimensions differ")
    bad = np.flatnonzero(lower.values > upper.values)
    if bad.size:
        raise ValueError(f"lower exceeds upper at vertex {int(bad[0])}")
    if cleanup_persistence < 0:
        raise ValueError("cleanup_persistence must be nonnegative")

    lo, hi = lower.values, upper.values
    hierarchy = superlevel_pairs(lower, topology)
    eligible = np.ones(lower.size, dtype=bool)
    for p in hierarchy.pairs:
        if p.persistence < cleanup_persistence:
            eligible[p.extremum] = False

    marked, level_vertex = _guarantee_sweep(lo, hi, topology, eligible)
    survivors = np.flatnonzero(marked)
    if survivors.size == 0:  # cannot happen: the global peak always marks
        raise AssertionError("guarantee sweep marked no peak")

    iso = _isolation_values(hierarchy, marked, lo)

    # Decreasing anchor value (ties by index) defines the label order.
    order = sorted(survivors, key=lambda v: (lo[v], v), reverse=True)
    rows = lo.reshape(lower.height, lower.width)
    idx_rows = np.arange(lower.size).reshape(rows.shape)
    result = []
    for label, anchor in enumerate(order):
        lv = int(level_vertex[anchor])
        mask = (rows > lo[lv]) | ((rows == lo[lv]) & (idx_rows >= lv))
        comp, _ = ndimage.label(mask, structure=CONNECTIVITY)
        region = np.flatnonzero((comp == comp.flat[anchor]).ravel())
        low = iso.get(int(anchor))
        if low is None:
            low = float(lo.min())
        high = float(hi[region].max())
        result.append(
            MandatoryMaximum(
                label=label,
                anchor=int(anchor),
                interval=(float(low), high),
                region=region,
                region_level=float(lo[lv]),
            )
        )
    return result


def _guarantee_sweep(lo, hi, topology, eligible):
    """Descending sweep of the lower field with a lazy boundary heap per
    component; marks each eligible peak at the highest level where the
    component's boundary upper-bound maximum drops below the peak value."""
    n = lo.size
    order = sos_order(lo)[::-1]
    nbr, valid = topology.neighbor_table()
    parent = np.full(n, -1, dtype=np.int64)
    peak = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    marked = np.zeros(n, dtype=bool)
    level_vertex = np.full(n, -1, dtype=np.int64)
    heaps: dict[int, list] = {}

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for step in range(n):
        v = int(order[step])
        pos[v] = step
        roots: list[int] = []
        inactive: list[int] = []
        for k in range(6):
            if not valid[v, k]:
                continue
            u = int(nbr[v, k])
            if parent[u] == -1:
                inactive.append(u)
                continue
            r = find(u)
            if r not in roots:
                roots.append(r)
        parent[v] = v
        peak[v] = v
        heap = [(-hi[u], u) for u in inactive]
        heapq.heapify(heap)
        heaps[v] = heap
        root = v
        if roots:
            roots.append(v)
            elder = min(roots, key=lambda r: pos[peak[r]])
            big = heaps[elder]
            for r in roots:
                if r == elder:
                    continue
                small = heaps.pop(r)
                if len(small) > len(big):
                    big, small = small, big
                    heaps[elder] = big
                for item in small:
                    heapq.heappush(big, item)
                parent[r] = elder
            root = elder

        p = int(peak[root])
        if marked[p] or not eligible[p]:
            continue
        h = heaps[root]
        while h and parent[h[0][1]] != -1:
            heapq.heappop(h)
        if not h or -h[0][0] < lo[p]:
            marked[p] = True
            level_vertex[p] = v
    return marked, level_vertex


def _isolation_values(hierarchy, marked, lo) -> dict[int, float]:
    """Saddle value at which each surviving peak's component first meets
    another survivor's component, replaying merges in sweep order."""
    srep: dict[int, int] = {}
    iso: dict[int, float] = {}
    for p in hierarchy.chronological:
        a, d = p.absorber, p.extremum
        ra = srep.get(a, a if marked[a] else None)
        rd = srep.get(d, d if marked[d] else None)
        if ra is not None and rd is not None:
            sval = float(lo[p.saddle])
            iso.setdefault(rd, sval)
            iso.setdefault(ra, sval)
            srep[a] = ra if (lo[ra], ra) >= (lo[rd], rd) else rd
        elif rd is not None:
            srep[a] = rd
        elif ra is not None:
            srep[a] = ra
    return iso


def nearest_label_map(mandatory: list[MandatoryMaximum], width: int, height: int) -> np.ndarray:
    """Per-vertex label of the Euclidean-nearest region (ties to lower label)."""
    if not mandatory:
        raise ValueError("empty mandatory list")
    dists = np.empty((len(mandatory), width * height))
    for i, mm in enumerate(sorted(mandatory, key=lambda m: m.label)):
        mask = np.ones((height, width), dtype=bool)
        mask.flat[mm.region] = False
        dists[i] = ndimage.distance_transform_edt(mask).ravel()
    return np.argmin(dists, axis=0).astype(np.int64)


def label_member_maxima(
    seg: Segmentation,
    mandatory: list[MandatoryMaximum],
    nearest: np.ndarray | None = None,
) -> dict[int, int]:
    """Assign every surviving maximum of a member to a mandatory label.

    A maximum inside a region takes that region's label; otherwise the
    label of the nearest region (grid-unit Euclidean distance, ties to the
    lower label). The member should be simplified to at most l maxima.
    """
    if not mandatory:
        raise ValueError("empty mandatory list")
    inside = np.full(seg.size, -1, dtype=np.int64)
    for mm in sorted(mandatory, key=lambda m: m.label, reverse=True):
        inside[mm.region] = mm.label
    if nearest is None:
        nearest = nearest_label_map(mandatory, seg.width, seg.height)
    out: dict[int, int] = {}
    for m in seg.maxima:
        lab = inside[m]
        out[int(m)] = int(lab if lab >= 0 else nearest[m])
    return out


def cluster_maxima_fallback(
    points: np.ndarray, l: int, seed: int, max_iter: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic k-means over maxima positions, for ensembles whose
    envelope is too wide for a one-to-one mandatory correspondence.

    Farthest-point initialization seeded from the canonically sorted point
    multiset, then Lloyd iterations to a fixed point (at most max_iter).
    Returns (centers, assignment) with assignment in input order; the
    result is invariant under permutations of the input.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    if l < 1:
        raise ValueError("l must be positive")
    if pts.shape[0] < l:
        raise ValueError(f"need at least {l} points, got {pts.shape[0]}")

    canon = np.lexsort((pts[:, 1], pts[:, 0]))
    sp = pts[canon]
    rng = np.random.default_rng(seed)
    centers = [sp[int(rng.integers(0, sp.shape[0]))]]
    for _ in range(1, l):
        d = np.min([np.sum((sp - c) ** 2, axis=1) for c in centers], axis=0)
        centers.append(sp[int(np.argmax(d))])
    centers = np.array(centers)

    assign_sorted = np.full(sp.shape[0], -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = np.sum((sp[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_assign = np.argmin(d2, axis=1)
        new_centers = centers.copy()
        for j in range(l):
            sel = new_assign == j
            if np.any(sel):
                new_centers[j] = sp[sel].mean(axis=0)
        if np.array_equal(new_assign, assign_sorted) and np.array_equal(new_centers, centers):
            break
        assign_sorted, centers = new_assign, new_centers

    assignment = np.empty(sp.shape[0], dtype=np.int64)
    assignment[canon] = assign_sorted
    return centers, assignment


def mandatory_to_json(mandatory: list[MandatoryMaximum], width: int) -> str:
    docs = []
    for mm in mandatory:
        runs = []
        region = mm.region
        if region.size:
            breaks = np.flatnonzero(np.diff(region) != 1)
            starts = np.concatenate(([0], breaks + 1))
            ends = np.concatenate((breaks, [region.size - 1]))
            runs = [[int(region[s]), int(region[e] - region[s] + 1)] for s, e in zip(starts, ends)]
        docs.append(
            {
                "label": mm.label,
                "anchor": [int(mm.anchor) // width, int(mm.anchor) % width],
                "interval": [mm.interval[0], mm.interval[1]],
                "region_rle": runs,
            }
        )
    return json.dumps(docs, sort_keys=True, separators=(",", ":"))
