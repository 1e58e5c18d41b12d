"""Isocontour extraction on grid fields and distances between contour sets.

Coordinates are (row, col) floats in grid units. A point is inside the
contour when its value is strictly greater than the isovalue; crossings are
placed by linear interpolation along cell edges.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

__all__ = ["marching_squares", "chain_segments", "segment_key", "symmetric_distance"]

Point = tuple[float, float]
Segment = tuple[Point, Point]

# For each 4-bit corner pattern (a=bit0 top-left, b=bit1 top-right,
# c=bit2 bottom-right, d=bit3 bottom-left), the crossed cell edges to join:
# edges 0=top, 1=right, 2=bottom, 3=left.
_CASES: dict[int, tuple[tuple[int, int], ...]] = {
    0: (), 15: (),
    1: ((3, 0),), 14: ((3, 0),),
    2: ((0, 1),), 13: ((0, 1),),
    4: ((1, 2),), 11: ((1, 2),),
    8: ((2, 3),), 7: ((2, 3),),
    3: ((3, 1),), 12: ((3, 1),),
    6: ((0, 2),), 9: ((0, 2),),
    # The two ambiguous checker patterns are resolved by the cell average.
    5: ((3, 0), (1, 2)),
    10: ((0, 1), (2, 3)),
}


def _interp(iso: float, p0: Point, v0: float, p1: Point, v1: float) -> Point:
    t = 0.5 if v1 == v0 else (iso - v0) / (v1 - v0)
    return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))


def marching_squares(field: np.ndarray, iso: float) -> list[Segment]:
    """Extract the isovalue crossing segments of a (height, width) field."""
    f = np.asarray(field, dtype=np.float64)
    if f.ndim != 2:
        raise ValueError("field must be 2D")
    h, w = f.shape
    inside = f > iso
    a = inside[:-1, :-1]
    b = inside[:-1, 1:]
    c = inside[1:, 1:]
    d = inside[1:, :-1]
    case = a * 1 + b * 2 + c * 4 + d * 8
    segments: list[Segment] = []
    for r, cidx in zip(*np.nonzero((case != 0) & (case != 15))):
        r, cidx = int(r), int(cidx)
        code = int(case[r, cidx])
        va, vb = f[r, cidx], f[r, cidx + 1]
        vc, vd = f[r + 1, cidx + 1], f[r + 1, cidx]
        if code in (5, 10):
            center_inside = (va + vb + vc + vd) / 4.0 > iso
            # Join the inside corners through the center when it is inside.
            if code == 5:
                pairs = ((3, 0), (1, 2)) if center_inside else ((3, 2), (1, 0))
            else:
                pairs = ((0, 1), (2, 3)) if center_inside else ((0, 3), (2, 1))
        else:
            pairs = _CASES[code]
        corners = ((r, cidx), (r, cidx + 1), (r + 1, cidx + 1), (r + 1, cidx))
        vals = (va, vb, vc, vd)
        edge_ends = ((0, 1), (1, 2), (2, 3), (3, 0))
        for e0, e1 in pairs:
            pts = []
            for e in (e0, e1):
                i0, i1 = edge_ends[e]
                pts.append(_interp(iso, corners[i0], vals[i0], corners[i1], vals[i1]))
            segments.append((pts[0], pts[1]))
    return segments


def segment_key(seg: Segment, decimals: int = 9) -> tuple:
    """Orientation-independent hashable key for deduplication."""
    p = (round(seg[0][0], decimals), round(seg[0][1], decimals))
    q = (round(seg[1][0], decimals), round(seg[1][1], decimals))
    return (p, q) if p <= q else (q, p)


def chain_segments(segments: list[Segment], decimals: int = 9) -> list[list[Point]]:
    """Join segments sharing endpoints into polylines (deterministic order)."""

    def key(p: Point) -> tuple:
        return (round(p[0], decimals), round(p[1], decimals))

    adj: dict[tuple, list[tuple[int, int]]] = {}
    for i, (p, q) in enumerate(segments):
        adj.setdefault(key(p), []).append((i, 0))
        adj.setdefault(key(q), []).append((i, 1))
    used = [False] * len(segments)
    polylines: list[list[Point]] = []

    def walk(i: int, start_end: int) -> list[Point]:
        used[i] = True
        p, q = segments[i]
        line = [p, q] if start_end == 0 else [q, p]
        while True:
            k = key(line[-1])
            nxt = None
            for j, end in adj.get(k, ()):
                if not used[j]:
                    nxt = (j, end)
                    break
            if nxt is None:
                return line
            j, end = nxt
            used[j] = True
            far = segments[j][1 - end]
            line.append(far)

    for i in range(len(segments)):
        if used[i]:
            continue
        line = walk(i, 0)
        # Extend backward from the line start if the curve continues there.
        k = key(line[0])
        for j, end in adj.get(k, ()):
            if not used[j]:
                back = walk(j, end)
                line = back[:0:-1] + line
                break
        polylines.append(line)
    return polylines


def _sample_polylines(polylines: list[list[Point]], step: float) -> np.ndarray:
    pts = []
    for line in polylines:
        arr = np.asarray(line, dtype=np.float64)
        pts.append(arr)
        for p, q in zip(arr[:-1], arr[1:]):
            d = float(np.hypot(*(q - p)))
            if d > step:
                n = int(d / step)
                ts = (np.arange(1, n + 1) / (n + 1))[:, None]
                pts.append(p[None, :] + ts * (q - p)[None, :])
    if not pts:
        return np.empty((0, 2))
    return np.concatenate(pts, axis=0)


def symmetric_distance(a: list[list[Point]], b: list[list[Point]], step: float = 0.25) -> float:
    """Mean symmetric point distance between two polyline sets.

    Both sets are densely resampled; each direction averages the nearest
    neighbor distance into the other cloud. Infinite when one side is empty
    while the other is not; zero when both are empty.
    """
    pa = _sample_polylines(a, step)
    pb = _sample_polylines(b, step)
    if pa.size == 0 and pb.size == 0:
        return 0.0
    if pa.size == 0 or pb.size == 0:
        return float("inf")
    da = cKDTree(pb).query(pa)[0].mean()
    db = cKDTree(pa).query(pb)[0].mean()
    return float((da + db) / 2.0)
