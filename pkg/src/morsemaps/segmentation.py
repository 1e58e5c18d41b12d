"""Steepest-ascent decomposition of a grid into basins of local maxima.

Every vertex is assigned the local maximum reached by repeatedly stepping
to its greatest neighbor (under the perturbed total order). The label
classes are the 2-cells of the gradient complex; their shared edges form
the discrete cell boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridTopology, ScalarGrid, sos_rank

__all__ = ["Segmentation", "steepest_neighbor", "steepest_neighbors", "segment", "cell_boundary"]


@dataclass(frozen=True)
class Segmentation:
    """Per-vertex basin labels. labels[v] is the maximum vertex whose basin
    contains v; maxima lists the distinct label values ascending."""

    width: int
    height: int
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int64).reshape(-1)
        if labels.shape != (self.width * self.height,):
            raise ValueError("labels length does not match grid dimensions")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def maxima(self) -> np.ndarray:
        return np.unique(self.labels)

    def cell(self, m: int) -> np.ndarray:
        """Vertex indices of the 2-cell labeled by maximum m."""
        return np.flatnonzero(self.labels == m)


def steepest_neighbors(grid: ScalarGrid, topology: GridTopology) -> np.ndarray:
    """For every vertex the ascending step target, or -1 at local maxima.

    The step target is the neighbor greatest under the total order, taken
    only when it exceeds the vertex itself.
    """
    nbr, valid = topology.neighbor_table()
    rank = sos_rank(grid.values)
    nbr_rank = np.where(valid, rank[np.where(valid, nbr, 0)], -1)
    best_slot = np.argmax(nbr_rank, axis=1)
    best = nbr[np.arange(grid.size), best_slot]
    ascending = nbr_rank[np.arange(grid.size), best_slot] > rank
    return np.where(ascending, best, -1)


def steepest_neighbor(grid: ScalarGrid, topology: GridTopology, v: int) -> int | None:
    """Ascending step target of a single vertex; None at a local maximum."""
    if not (0 <= v < grid.size):
        raise ValueError(f"vertex {v} out of range")
    nxt = int(steepest_neighbors(grid, topology)[v])
    return None if nxt == -1 else nxt


def segment(grid: ScalarGrid, topology: GridTopology) -> Segmentation:
    """Label every vertex with the terminus of its steepest-ascent path.

    Pointer doubling resolves all paths simultaneously, so the result does
    not depend on any vertex processing order.
    """
    if (grid.width, grid.height) != (topology.width, topology.height):
        raise ValueError("grid and topology dimensions differ")
    nxt = steepest_neighbors(grid, topology)
    labels = np.where(nxt == -1, np.arange(grid.size), nxt)
    while True:
        jumped = labels[labels]
        if np.array_equal(jumped, labels):
            break
        labels = jumped
    return Segmentation(grid.width, grid.height, labels)


def cell_boundary(seg: Segmentation, topology: GridTopology) -> set[tuple[int, int]]:
    """Adjacent vertex pairs with different labels, as (u, v) with u < v.

    Empty exactly when the segmentation has a single cell.
    """
    if (seg.width, seg.height) != (topology.width, topology.height):
        raise ValueError("segmentation and topology dimensions differ")
    nbr, valid = topology.neighbor_table()
    labels = seg.labels
    pairs: set[tuple[int, int]] = set()
    # The first three slots (E, SE, S) cover each undirected edge once.
    for k in range(3):
        vs = np.flatnonzero(valid[:, k])
        us = nbr[vs, k]
        diff = labels[vs] != labels[us]
        for v, u in zip(vs[diff], us[diff]):
            pairs.add((int(min(v, u)), int(max(v, u))))
    return pairs
