"""Scalar fields on regular grids with a triangulated 6-neighborhood topology.

Vertices are indexed row-major: vertex = r * width + c, row 0 at the top.
All comparisons between vertices use a strict total order ("symbolic
perturbation"): i < j by value, ties broken by vertex index. This makes
every field a Morse function with a unique global minimum and maximum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels

__all__ = [
    "ScalarGrid",
    "GridTopology",
    "CriticalKind",
    "CriticalPoint",
    "sos_order",
    "sos_rank",
    "sos_isless",
    "classify",
    "classify_all",
    "critical_points",
]

# Cyclic order of the 6 neighbor offsets (dr, dc) around a vertex:
# E, SE, S, W, NW, N. Consecutive offsets are edge-connected in the
# triangulation, so the link of an interior vertex is a 6-cycle.
NEIGHBOR_OFFSETS = ((0, 1), (1, 1), (1, 0), (0, -1), (-1, -1), (-1, 0))


@dataclass(frozen=True)
class ScalarGrid:
    """A finite 2D scalar field sampled on a width x height grid.

    values is row-major with length width * height; all entries finite.
    Instances are immutable and safe to share between threads.
    """

    width: int
    height: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.width}x{self.height}")
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape == (self.height, self.width):
            values = values.reshape(-1)
        if values.shape != (self.width * self.height,):
            raise ValueError(
                f"values has shape {np.shape(self.values)}, expected "
                f"{self.width * self.height} entries for {self.width}x{self.height}"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"non-finite value at vertex {bad}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return self.width * self.height

    def as_rows(self) -> np.ndarray:
        """Return the field as a (height, width) array view."""
        return self.values.reshape(self.height, self.width)

    def vertex(self, r: int, c: int) -> int:
        if not (0 <= r < self.height and 0 <= c < self.width):
            raise ValueError(f"({r}, {c}) outside {self.height}x{self.width} grid")
        return r * self.width + c

    def rc(self, v: int) -> tuple[int, int]:
        if not (0 <= v < self.size):
            raise ValueError(f"vertex {v} out of range")
        return divmod(v, self.width)

    def shifted(self, offset: float) -> "ScalarGrid":
        return ScalarGrid(self.width, self.height, self.values + offset)

    def negated(self) -> "ScalarGrid":
        return ScalarGrid(self.width, self.height, -self.values)


class GridTopology:
    """Triangulated adjacency for a width x height grid.

    Vertex (r, c) is adjacent to its 4-neighbors plus the two diagonal
    neighbors (r+1, c+1) and (r-1, c-1), clipped at the boundary. Interior
    vertices have 6 neighbors, corner vertices 2 or 3, edge vertices 4.
    """

    def __init__(self, width: int, height: int):
        if width < 2 or height < 2:
            raise ValueError(f"topology must be at least 2x2, got {width}x{height}")
        self.width = width
        self.height = height

    @property
    def size(self) -> int:
        return self.width * self.height

    def neighbors(self, v: int) -> list[int]:
        """Neighbors of v in cyclic link order (E, SE, S, W, NW, N), clipped."""
        if not (0 <= v < self.size):
            raise ValueError(f"vertex {v} out of range")
        r, c = divmod(v, self.width)
        out = []
        for dr, dc in NEIGHBOR_OFFSETS:
            rr, cc = r + dr, c + dc
            if 0 <= rr < self.height and 0 <= cc < self.width:
                out.append(rr * self.width + cc)
        return out

    def neighbor_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense (size, 6) neighbor array in cyclic slot order plus a validity mask.

        Invalid (clipped) slots hold -1.
        """
        if not hasattr(self, "_table"):
            r, c = np.divmod(np.arange(self.size), self.width)
            nbr = np.empty((self.size, 6), dtype=np.int64)
            valid = np.empty((self.size, 6), dtype=bool)
            for k, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
                rr, cc = r + dr, c + dc
                ok = (rr >= 0) & (rr < self.height) & (cc >= 0) & (cc < self.width)
                nbr[:, k] = np.where(ok, rr * self.width + cc, -1)
                valid[:, k] = ok
            nbr.setflags(write=False)
            valid.setflags(write=False)
            self._table = (nbr, valid)
        return self._table

    def edges(self):
        """Yield each undirected edge (u, v) with u < v exactly once."""
        nbr, valid = self.neighbor_table()
        for v in range(self.size):
            for k in range(6):
                if valid[v, k] and v < nbr[v, k]:
                    yield v, int(nbr[v, k])


def sos_order(values: np.ndarray) -> np.ndarray:
    """Vertex indices sorted ascending under the symbolically perturbed order.

    Position 0 is the global minimum, position -1 the global maximum.
    """
    values = np.asarray(values)
    return np.lexsort((np.arange(values.size), values))


def sos_rank(values: np.ndarray) -> np.ndarray:
    """rank[v] = position of v in the ascending total order."""
    order = sos_order(values)
    rank = np.empty(values.size, dtype=np.int64)
    rank[order] = np.arange(values.size)
    return rank


def sos_isless(values: np.ndarray, i: int, j: int) -> bool:
    """Strict comparison i < j under the perturbed total order."""
    vi, vj = values[i], values[j]
    return bool(vi < vj or (vi == vj and i < j))


class CriticalKind(Enum):
    MINIMUM = "minimum"
    SADDLE = "saddle"
    MAXIMUM = "maximum"
    REGULAR = "regular"


@dataclass(frozen=True)
class CriticalPoint:
    vertex: int
    kind: CriticalKind
    value: float
    multiplicity: int = 1


def classify_all(grid: ScalarGrid, topology: GridTopology) -> tuple[np.ndarray, np.ndarray]:
    """Classify every vertex by its lower/upper link.

    Returns (kinds, multiplicity) where kinds holds codes 0 = regular,
    1 = minimum, 2 = saddle, 3 = maximum, and multiplicity counts the extra
    lower-link components of saddles (0 elsewhere). Boundary vertices are
    classified on their clipped link, so boundary extrema are reported.
    """
    if (grid.width, grid.height) != (topology.width, topology.height):
        raise ValueError("grid and topology dimensions differ")
    nbr, valid = topology.neighbor_table()
    rank = sos_rank(grid.values)
    return _kernels.classify_kernel(rank, nbr, valid)


def classify(grid: ScalarGrid, topology: GridTopology, v: int) -> CriticalPoint:
    """Classify a single vertex; see classify_all for the rule."""
    if not (0 <= v < grid.size):
        raise ValueError(f"vertex {v} out of range")
    kinds, mult = classify_all(grid, topology)
    kind = (CriticalKind.REGULAR, CriticalKind.MINIMUM, CriticalKind.SADDLE, CriticalKind.MAXIMUM)[int(kinds[v])]
    m = int(mult[v]) if kind is CriticalKind.SADDLE else 1
    return CriticalPoint(v, kind, float(grid.values[v]), m)


def critical_points(grid: ScalarGrid, topology: GridTopology) -> list[CriticalPoint]:
    """All non-regular vertices, ascending by vertex index."""
    kinds, mult = classify_all(grid, topology)
    out = []
    for v in np.flatnonzero(kinds != 0):
        kind = (CriticalKind.REGULAR, CriticalKind.MINIMUM, CriticalKind.SADDLE, CriticalKind.MAXIMUM)[int(kinds[v])]
        m = int(mult[v]) if kind is CriticalKind.SADDLE else 1
        out.append(CriticalPoint(int(v), kind, float(grid.values[v]), m))
    return out
