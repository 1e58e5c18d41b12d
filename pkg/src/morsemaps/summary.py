"""The two ensemble summary maps and their derived products.

The probabilistic map records, per vertex, how often its ascending flow
ended at each labeled guaranteed maximum across the ensemble. The survival
map averages per-member survival measures: cancelling cells in ascending
persistence order, each step credits its persistence to the points whose
flow direction survives the merge (the absorbing cell before the merge).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .grid import GridTopology, ScalarGrid
from .contours import chain_segments, marching_squares, segment_key
from .ensemble import Ensemble
from .mandatory import MandatoryMaximum, label_member_maxima, nearest_label_map
from .persistence import superlevel_pairs
from .segmentation import segment

__all__ = [
    "ProbabilisticMap",
    "SurvivalMap",
    "probabilistic_map",
    "member_label_field",
    "certainty_partition",
    "expected_boundary",
    "expected_boundaries",
    "agreement_cells",
    "query",
    "survival_member",
    "survival_map",
    "quantize",
]


@dataclass(frozen=True)
class ProbabilisticMap:
    """Per-vertex counts of flow destinations over n members and l labels."""

    width: int
    height: int
    n: int
    counts: np.ndarray = field(repr=False)
    anchors: tuple[int, ...] = ()

    def __post_init__(self):
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != self.width * self.height:
            raise ValueError("counts must have shape (width*height, l)")
        bad = np.flatnonzero(counts.sum(axis=1) != self.n)
        if bad.size:
            raise ValueError(f"counts at vertex {int(bad[0])} do not sum to n")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def l(self) -> int:
        return self.counts.shape[1]

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def dist(self) -> np.ndarray:
        """(V, l) probabilities; every entry is a multiple of 1/n."""
        return self.counts / self.n


@dataclass(frozen=True)
class SurvivalMap:
    """Ensemble mean of per-member survival measures."""

    width: int
    height: int
    values: np.ndarray = field(repr=False)
    normalization: str = "none"
    member_totals: tuple[float, ...] = ()

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64).reshape(-1)
        if values.shape != (self.width * self.height,):
            raise ValueError("values length does not match dimensions")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def member_label_field(
    grid: ScalarGrid,
    topology: GridTopology,
    mandatory: list[MandatoryMaximum],
    nearest: np.ndarray | None = None,
) -> np.ndarray:
    """Per-vertex mandatory label for one member.

    The member is decomposed, simplified down to at most l maxima, its
    surviving maxima are labeled, and every vertex inherits the label of
    its flow destination.
    """
    from .persistence import simplify_to

    seg = segment(grid, topology)
    hierarchy = superlevel_pairs(grid, topology)
    k = min(len(mandatory), len(seg.maxima))
    simplified = simplify_to(seg, hierarchy, k)
    assignment = label_member_maxima(simplified, mandatory, nearest)
    lut = np.zeros(grid.size, dtype=np.int64)
    for m, lab in assignment.items():
        lut[m] = lab
    return lut[simplified.labels]


def probabilistic_map(ensemble: Ensemble, mandatory: list[MandatoryMaximum]) -> ProbabilisticMap:
    """Count each vertex's flow destination label across all members."""
    if not mandatory:
        raise ValueError("empty mandatory list")
    w, h = ensemble.width, ensemble.height
    for mm in mandatory:
        if mm.anchor >= w * h:
            raise ValueError("mandatory anchors outside the ensemble grid")
    topology = GridTopology(w, h)
    l = len(mandatory)
    nearest = nearest_label_map(mandatory, w, h)
    counts = np.zeros(w * h * l, dtype=np.int64)
    base = np.arange(w * h) * l
    for member in ensemble.members:
        labels = member_label_field(member, topology, mandatory, nearest)
        counts += np.bincount(base + labels, minlength=counts.size)
    anchors = tuple(mm.anchor for mm in sorted(mandatory, key=lambda m: m.label))
    return ProbabilisticMap(w, h, ensemble.n, counts.reshape(w * h, l), anchors)


def certainty_partition(pmap: ProbabilisticMap) -> tuple[np.ndarray, np.ndarray]:
    """(labels, uncertain) where labels[v] is the unanimous label or -1 and
    uncertain lists the vertices without a unanimous destination."""
    full = pmap.counts == pmap.n
    labels = np.where(full.any(axis=1), np.argmax(full, axis=1), -1)
    return labels, np.flatnonzero(labels < 0)


def expected_boundary(pmap: ProbabilisticMap, label: int) -> list[list[tuple[float, float]]]:
    """Polylines where the label's destination probability crosses one half."""
    if pmap.l < 2:
        raise ValueError("need at least two labels for boundaries")
    if not (0 <= label < pmap.l):
        raise ValueError(f"label {label} out of range")
    p = (pmap.counts[:, label] / pmap.n).reshape(pmap.height, pmap.width)
    return chain_segments(marching_squares(p, 0.5))


def expected_boundaries(pmap: ProbabilisticMap) -> list[list[tuple[float, float]]]:
    """Half-probability contours over all labels, deduplicated.

    Where exactly two labels meet, both carry the same crossing; each shared
    segment is reported once.
    """
    seen = set()
    unique = []
    for label in range(pmap.l):
        p = (pmap.counts[:, label] / pmap.n).reshape(pmap.height, pmap.width)
        for seg in marching_squares(p, 0.5):
            k = segment_key(seg)
            if k not in seen:
                seen.add(k)
                unique.append(seg)
    return chain_segments(unique)


def agreement_cells(pmap: ProbabilisticMap, a: float) -> np.ndarray:
    """Label where some destination reaches agreement fraction a, else -1.

    a must exceed one half so the assignment is unique.
    """
    if not (0.5 < a <= 1.0):
        raise ValueError(f"agreement threshold must be in (0.5, 1], got {a}")
    t = int(np.ceil(a * pmap.n - 1e-9))
    t = max(t, pmap.n // 2 + 1)
    hit = pmap.counts >= t
    return np.where(hit.any(axis=1), np.argmax(hit, axis=1), -1)


def query(pmap: ProbabilisticMap, r: int, c: int) -> tuple[list[int], list[float]]:
    """Label ids and probabilities at one grid point (exact map values)."""
    if not (0 <= r < pmap.height and 0 <= c < pmap.width):
        raise ValueError(f"({r}, {c}) outside {pmap.height}x{pmap.width} grid")
    v = r * pmap.width + c
    probs = (pmap.counts[v] / pmap.n).tolist()
    return list(range(pmap.l)), probs


def survival_member(grid: ScalarGrid, topology: GridTopology) -> np.ndarray:
    """Survival measure of one field.

    Replays all cancellations in ascending persistence order; at each step
    the pair's persistence is added over the absorbing representative's
    current cell (before the merge). Values are constant on the original
    cells, so the replay runs on cells rather than vertices.
    """
    seg = segment(grid, topology)
    hierarchy = superlevel_pairs(grid, topology)
    maxima = seg.maxima
    index_of = {int(m): i for i, m in enumerate(maxima)}
    dying = np.array([index_of[p.extremum] for p in hierarchy.pairs], dtype=np.int64)
    absorber = np.array([index_of[p.absorber] for p in hierarchy.pairs], dtype=np.int64)
    lam = np.array([p.persistence for p in hierarchy.pairs], dtype=np.float64)
    per_max = _kernels.survival_replay_kernel(len(maxima), dying, absorber, lam)
    lut = np.zeros(grid.size, dtype=np.float64)
    lut[maxima] = per_max
    return lut[seg.labels]


def survival_map(ensemble: Ensemble, normalization: str = "none") -> SurvivalMap:
    """Average the members' survival measures.

    by_member_total first divides each member by its total cancelled
    persistence (members without cancellations contribute zero). Per-vertex
    values are summed in sorted order, so member order cannot change the
    result, bit for bit.
    """
    if normalization not in ("none", "by_member_total"):
        raise ValueError(f"unknown normalization {normalization!r}")
    topology = GridTopology(ensemble.width, ensemble.height)
    fields = []
    totals = []
    for member in ensemble.members:
        hierarchy = superlevel_pairs(member, topology)
        total = float(np.sum([p.persistence for p in hierarchy.pairs]))
        beta = survival_member(member, topology)
        if normalization == "by_member_total":
            beta = beta / total if total > 0 else np.zeros_like(beta)
        fields.append(beta)
        totals.append(total)
    stack = np.sort(np.stack(fields), axis=0)
    values = stack.sum(axis=0) / ensemble.n
    return SurvivalMap(ensemble.width, ensemble.height, values, normalization, tuple(totals))


def quantize(values: np.ndarray, k: int) -> np.ndarray:
    """Equal-width bin index in [0, k) over [min, max]; constant maps to 0."""
    if k < 1:
        raise ValueError(f"bin count must be positive, got {k}")
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros(v.size, dtype=np.int64)
    return np.minimum((np.floor((v - lo) / (hi - lo) * k)).astype(np.int64), k - 1)
