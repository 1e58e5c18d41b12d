"""Zero-dimensional persistence of grid fields and hierarchical simplification.

The superlevel sweep pairs each non-global local maximum with the saddle at
which its component merges into an older one; the sublevel sweep does the
same for minima. Cancelling pairs in ascending persistence order drives
both segmentation simplification and the survival measure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .grid import GridTopology, ScalarGrid, sos_order
from .segmentation import Segmentation

__all__ = [
    "PersistencePair",
    "PersistenceHierarchy",
    "superlevel_pairs",
    "sublevel_pairs",
    "min_feature_persistence",
    "simplify_to",
    "cancellation_sequence",
    "hierarchy_to_json",
]


@dataclass(frozen=True)
class PersistencePair:
    """One cancellation: extremum dies at saddle, absorbed by an older peak."""

    extremum: int
    saddle: int
    absorber: int
    persistence: float


@dataclass(frozen=True)
class PersistenceHierarchy:
    """All finite pairs of one filtration, in canonical cancellation order.

    pairs are sorted ascending by persistence with ties broken by the
    saddle's position in the total order, then the extremum's; replaying
    them in full merges everything into the cell of global_extremum.
    chronological holds the same events in sweep (merge) order.
    """

    kind: str  # "superlevel" or "sublevel"
    pairs: tuple[PersistencePair, ...]
    global_extremum: int
    value_range: float
    extrema: np.ndarray = field(repr=False)
    chronological: tuple[PersistencePair, ...] = field(repr=False, default=())

    @property
    def n_extrema(self) -> int:
        return len(self.extrema)


def _sweep(grid: ScalarGrid, topology: GridTopology, kind: str) -> PersistenceHierarchy:
    if (grid.width, grid.height) != (topology.width, topology.height):
        raise ValueError("grid and topology dimensions differ")
    order = sos_order(grid.values)
    act = order[::-1].copy() if kind == "superlevel" else order.copy()
    nbr, valid = topology.neighbor_table()
    dying, saddle, absorber, is_leaf = _kernels.merge_events_kernel(act, nbr, valid)

    values = grid.values
    pers = np.abs(values[dying] - values[saddle])
    chrono = tuple(
        PersistencePair(int(d), int(s), int(a), float(p))
        for d, s, a, p in zip(dying, saddle, absorber, pers)
    )
    # Canonical cancellation order: persistence, then saddle and extremum
    # under the total order (value before index).
    key = np.lexsort((dying, values[dying], saddle, values[saddle], pers))
    ordered = tuple(chrono[int(i)] for i in key)
    vrange = float(values[int(order[-1])] - values[int(order[0])])
    return PersistenceHierarchy(
        kind=kind,
        pairs=ordered,
        global_extremum=int(act[0]),
        value_range=vrange,
        extrema=np.flatnonzero(is_leaf),
        chronological=chrono,
    )


def superlevel_pairs(grid: ScalarGrid, topology: GridTopology) -> PersistenceHierarchy:
    """Maximum-saddle pairs from the descending sweep.

    The component of the greater maximum survives each merge; the global
    maximum stays unpaired (its reported span is the field's value range).
    """
    return _sweep(grid, topology, "superlevel")


def sublevel_pairs(grid: ScalarGrid, topology: GridTopology) -> PersistenceHierarchy:
    """Minimum-saddle pairs from the ascending sweep (dual of superlevel_pairs)."""
    return _sweep(grid, topology, "sublevel")


def min_feature_persistence(grid: ScalarGrid, topology: GridTopology) -> float:
    """Smallest finite persistence over both filtrations; inf if neither has pairs."""
    best = np.inf
    for h in (superlevel_pairs(grid, topology), sublevel_pairs(grid, topology)):
        if h.pairs:
            best = min(best, h.pairs[0].persistence)
    return float(best)


def _resolve_absorptions(pairs, t: int) -> dict[int, int]:
    """Map each extremum dying in the first t cancellations to its final live peak."""
    parent: dict[int, int] = {}
    for p in pairs[:t]:
        parent[p.extremum] = p.absorber
    out: dict[int, int] = {}

    def find(m: int) -> int:
        path = []
        while m in parent:
            path.append(m)
            m = parent[m]
        for q in path:
            out[q] = m
        return m

    for m in list(parent):
        find(m)
    return out


def simplify_to(seg: Segmentation, hierarchy: PersistenceHierarchy, k: int) -> Segmentation:
    """Cancel lowest-persistence pairs until exactly k maxima remain.

    Each cancellation folds the dying maximum's current cell into the cell
    of its absorber's live representative. k equal to the current count
    returns the segmentation unchanged; k = 1 leaves the global maximum.
    """
    if hierarchy.kind != "superlevel":
        raise ValueError("segmentation simplification needs the superlevel hierarchy")
    m = len(seg.maxima)
    if not (1 <= k <= m):
        raise ValueError(f"target count {k} outside [1, {m}]")
    t = m - k
    if t == 0:
        return seg
    final = _resolve_absorptions(hierarchy.pairs, t)
    lut = np.arange(seg.size)
    for dead, live in final.items():
        lut[dead] = live
    return Segmentation(seg.width, seg.height, lut[seg.labels])


def cancellation_sequence(hierarchy: PersistenceHierarchy) -> list[tuple[int, int, int, float]]:
    """(saddle, dying maximum, absorber, persistence) in cancellation order."""
    return [(p.saddle, p.extremum, p.absorber, p.persistence) for p in hierarchy.pairs]


def hierarchy_to_json(hierarchy: PersistenceHierarchy) -> str:
    doc = {
        "kind": hierarchy.kind,
        "pairs": [
            {"saddle": p.saddle, "max" if hierarchy.kind == "superlevel" else "min": p.extremum,
             "absorber": p.absorber, "persistence": p.persistence}
            for p in hierarchy.pairs
        ],
        "global_max" if hierarchy.kind == "superlevel" else "global_min": hierarchy.global_extremum,
        "range": hierarchy.value_range,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
