"""Synthetic ground-truth fields, bounded noise models, and ensemble handling.

The classic benchmark surfaces are negated so their wells become peaks.
Every noise model draws per-vertex offsets with a hard amplitude bound, via
an independently keyed counter-based generator per ensemble member, so
members can be produced in any order with identical results.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr, ndtri

from .grid import ScalarGrid

__all__ = [
    "NoiseSpec",
    "Ensemble",
    "ackley",
    "himmelblau",
    "gaussian_mixture",
    "four_gaussians",
    "perturb",
    "mean_field",
    "bound_fields",
    "velocity_magnitude",
    "save_ensemble",
    "load_ensemble",
    "ACKLEY_DEFAULT_DOMAIN",
]

# Square around the origin holding the 3x3 lattice of dominant peaks of the
# negated Ackley surface and nothing else (verified by classification).
ACKLEY_DEFAULT_DOMAIN = (-1.4, 1.4, -1.4, 1.4)


def _axes(width: int, height: int, domain: tuple[float, float, float, float]):
    x0, x1, y0, y1 = domain
    if not (x0 < x1 and y0 < y1):
        raise ValueError(f"degenerate domain {domain}")
    x = np.linspace(x0, x1, width)
    y = np.linspace(y1, y0, height)  # row 0 at the top
    return np.meshgrid(x, y)


def ackley(width: int, height: int, domain: tuple[float, float, float, float] = ACKLEY_DEFAULT_DOMAIN) -> ScalarGrid:
    """Negated Ackley surface; nine local maxima on the default domain."""
    xx, yy = _axes(width, height, domain)
    a = (
        -20.0 * np.exp(-0.2 * np.sqrt(0.5 * (xx**2 + yy**2)))
        - np.exp(0.5 * (np.cos(2 * np.pi * xx) + np.cos(2 * np.pi * yy)))
        + math.e
        + 20.0
    )
    return ScalarGrid(width, height, -a)


def himmelblau(width: int, height: int) -> ScalarGrid:
    """Negated Himmelblau surface on [-6, 6]^2; four equal-height maxima."""
    xx, yy = _axes(width, height, (-6.0, 6.0, -6.0, 6.0))
    h = (xx**2 + yy - 11.0) ** 2 + (xx + yy**2 - 7.0) ** 2
    return ScalarGrid(width, height, -h)


def gaussian_mixture(
    width: int,
    height: int,
    components: tuple[tuple[float, float, float, float], ...],
    domain: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0),
) -> ScalarGrid:
    """Sum of isotropic bumps; each component is (amplitude, x, y, sigma)."""
    if not components:
        raise ValueError("at least one component required")
    xx, yy = _axes(width, height, domain)
    f = np.zeros_like(xx)
    for amp, mx, my, sigma in components:
        if sigma <= 0:
            raise ValueError(f"component sigma must be positive, got {sigma}")
        f += amp * np.exp(-((xx - mx) ** 2 + (yy - my) ** 2) / (2.0 * sigma**2))
    return ScalarGrid(width, height, f)


# Four well separated bumps with staggered heights on the unit square.
FOUR_GAUSSIAN_COMPONENTS = (
    (1.00, 0.28, 0.28, 0.11),
    (0.95, 0.72, 0.28, 0.11),
    (0.90, 0.28, 0.72, 0.11),
    (0.80, 0.72, 0.72, 0.11),
)


def four_gaussians(width: int, height: int) -> ScalarGrid:
    return gaussian_mixture(width, height, FOUR_GAUSSIAN_COMPONENTS)


@dataclass(frozen=True)
class NoiseSpec:
    """Bounded per-vertex noise: every sample satisfies abs(eps) <= amplitude.

    kinds: uniform_symmetric, uniform_signed_magnitude, gaussian_truncated,
    multimodal_mixture. components (mixture only) is a tuple of
    (weight, mean, sigma) triples.
    """

    kind: str
    amplitude: float
    sigma: float = 0.0
    components: tuple[tuple[float, float, float], ...] = ()

    _KINDS = ("uniform_symmetric", "uniform_signed_magnitude", "gaussian_truncated", "multimodal_mixture")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be nonnegative, got {self.amplitude}")
        if self.kind == "gaussian_truncated" and self.sigma <= 0:
            raise ValueError("gaussian_truncated needs a positive sigma")
        if self.kind == "multimodal_mixture":
            if not self.components:
                raise ValueError("multimodal_mixture needs components")
            if any(w <= 0 for w, _, _ in self.components):
                raise ValueError("component weights must be positive")

    @classmethod
    def uniform_symmetric(cls, amplitude: float) -> "NoiseSpec":
        return cls("uniform_symmetric", amplitude)

    @classmethod
    def uniform_signed_magnitude(cls, amplitude: float) -> "NoiseSpec":
        return cls("uniform_signed_magnitude", amplitude)

    @classmethod
    def gaussian_truncated(cls, sigma: float, amplitude: float) -> "NoiseSpec":
        return cls("gaussian_truncated", amplitude, sigma=sigma)

    @classmethod
    def multimodal_mixture(cls, components, amplitude: float) -> "NoiseSpec":
        return cls("multimodal_mixture", amplitude, components=tuple(tuple(c) for c in components))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        a = self.amplitude
        if a == 0.0:
            rng.random(size)  # keep the stream layout independent of amplitude
            return np.zeros(size)
        if self.kind == "uniform_symmetric":
            return a * (2.0 * rng.random(size) - 1.0)
        if self.kind == "uniform_signed_magnitude":
            mag = a * rng.random(size)
            sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
            return sign * mag
        if self.kind == "gaussian_truncated":
            return _truncated_normal(rng.random(size), 0.0, self.sigma, a)
        # multimodal mixture: pick a component, then draw within [-a, a]
        weights = np.array([w for w, _, _ in self.components])
        cdf = np.cumsum(weights) / weights.sum()
        comp = np.searchsorted(cdf, rng.random(size), side="right").clip(0, len(cdf) - 1)
        u = rng.random(size)
        eps = np.empty(size)
        for i, (_, mu, sigma) in enumerate(self.components):
            sel = comp == i
            if not np.any(sel):
                continue
            if sigma <= 0:
                eps[sel] = np.clip(mu, -a, a)
            else:
                eps[sel] = _truncated_normal(u[sel], mu, sigma, a)
        return eps

    def to_json_dict(self) -> dict:
        doc = {"kind": self.kind, "amplitude": self.amplitude}
        if self.kind == "gaussian_truncated":
            doc["sigma"] = self.sigma
        if self.kind == "multimodal_mixture":
            doc["components"] = [list(c) for c in self.components]
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "NoiseSpec":
        return cls(
            doc["kind"],
            float(doc["amplitude"]),
            sigma=float(doc.get("sigma", 0.0)),
            components=tuple(tuple(c) for c in doc.get("components", ())),
        )


def _truncated_normal(u: np.ndarray, mu: float, sigma: float, a: float) -> np.ndarray:
    """Inverse-CDF samples of N(mu, sigma^2) conditioned on [-a, a]."""
    lo = ndtr((-a - mu) / sigma)
    hi = ndtr((a - mu) / sigma)
    if hi <= lo:  # component mass entirely outside the bound
        return np.full(u.shape, np.clip(mu, -a, a))
    vals = mu + sigma * ndtri(lo + u * (hi - lo))
    return np.clip(vals, -a, a)


@dataclass(frozen=True)
class Ensemble:
    """A set of same-shaped fields drawn around an optional ground truth."""

    members: tuple[ScalarGrid, ...]
    ground_truth: ScalarGrid | None = None
    seed: int = 0
    provenance: str = ""

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        w, h = self.members[0].width, self.members[0].height
        for m in self.members:
            if (m.width, m.height) != (w, h):
                raise ValueError("ensemble members must share dimensions")
        if self.ground_truth is not None and (self.ground_truth.width, self.ground_truth.height) != (w, h):
            raise ValueError("ground truth dimensions differ from members")

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def width(self) -> int:
        return self.members[0].width

    @property
    def height(self) -> int:
        return self.members[0].height


def _member_rng(seed: int, member: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, member], dtype=np.uint64)))


def perturb(ground_truth: ScalarGrid, spec: NoiseSpec, n: int, seed: int) -> Ensemble:
    """n independent members, member i = ground truth + noise keyed by (seed, i)."""
    if n < 1:
        raise ValueError(f"need at least one member, got {n}")
    members = []
    for i in range(n):
        eps = spec.sample(_member_rng(seed, i), ground_truth.size)
        members.append(ScalarGrid(ground_truth.width, ground_truth.height, ground_truth.values + eps))
    return Ensemble(
        members=tuple(members),
        ground_truth=ground_truth,
        seed=seed,
        provenance=f"perturb({spec.kind}, a={spec.amplitude!r}, n={n}, seed={seed})",
    )


def mean_field(ensemble: Ensemble) -> ScalarGrid:
    stack = np.stack([m.values for m in ensemble.members])
    return ScalarGrid(ensemble.width, ensemble.height, stack.mean(axis=0))


def bound_fields(ensemble: Ensemble) -> tuple[ScalarGrid, ScalarGrid]:
    """Pointwise envelope (lower, upper) over the members."""
    stack = np.stack([m.values for m in ensemble.members])
    lo = ScalarGrid(ensemble.width, ensemble.height, stack.min(axis=0))
    hi = ScalarGrid(ensemble.width, ensemble.height, stack.max(axis=0))
    return lo, hi


def contaminated_ensemble(
    ground_truth: ScalarGrid,
    amplitude: float,
    n: int,
    seed: int,
    contaminated_fraction: float = 0.4,
    pattern_frequency: float = 2.0,
) -> Ensemble:
    """Two-population ensemble: a clean majority plus a coherently biased minority.

    Per vertex the noise is bimodal: a point mass at zero (the clean
    members) and a positive mode following a fixed smooth spatial pattern,
    scaled per contaminated member by a uniform draw in [0.7, 1]. All
    offsets stay within the amplitude bound. The minority drags the mean
    field's cells toward the pattern while a majority vote of flow
    destinations stays anchored, which is the regime where destination
    statistics beat mean-field summaries.
    """
    if amplitude < 0:
        raise ValueError(f"amplitude must be nonnegative, got {amplitude}")
    if not (0.0 <= contaminated_fraction < 0.5):
        raise ValueError("contaminated fraction must stay below one half")
    if n < 1:
        raise ValueError(f"need at least one member, got {n}")
    w, h = ground_truth.width, ground_truth.height
    r, c = np.divmod(np.arange(ground_truth.size), w)
    g = 0.5 + 0.5 * np.sin(2 * np.pi * pattern_frequency * c / (w - 1)) * np.sin(
        2 * np.pi * pattern_frequency * r / (h - 1)
    )
    n_bad = int(round(contaminated_fraction * n))
    members = []
    for i in range(n):
        u = float(_member_rng(seed, i).random())
        if i < n_bad:
            values = ground_truth.values + amplitude * g * (0.7 + 0.3 * u)
        else:
            values = ground_truth.values.copy()
        members.append(ScalarGrid(w, h, values))
    return Ensemble(
        members=tuple(members),
        ground_truth=ground_truth,
        seed=seed,
        provenance=f"contaminated(a={amplitude!r}, frac={contaminated_fraction!r}, n={n}, seed={seed})",
    )


def velocity_magnitude(u: ScalarGrid, v: ScalarGrid) -> ScalarGrid:
    """Pointwise magnitude of a (u, v) component pair."""
    if (u.width, u.height) != (v.width, v.height):
        raise ValueError("component grids must share dimensions")
    return ScalarGrid(u.width, u.height, np.hypot(u.values, v.values))


def save_ensemble(directory: str | Path, ensemble: Ensemble) -> Path:
    """Write member fields plus a manifest; returns the manifest path."""
    from .formats import save_field

    directory = Path(directory)
    (directory / "members").mkdir(parents=True, exist_ok=True)
    member_paths = []
    for i, m in enumerate(ensemble.members):
        rel = f"members/member_{i:04d}.mcf1"
        (directory / rel).write_bytes(save_field(m))
        member_paths.append(rel)
    doc = {
        "width": ensemble.width,
        "height": ensemble.height,
        "n": ensemble.n,
        "members": member_paths,
        "seed": ensemble.seed,
        "generator": ensemble.provenance,
    }
    if ensemble.ground_truth is not None:
        (directory / "ground_truth.mcf1").write_bytes(save_field(ensemble.ground_truth))
        doc["ground_truth"] = "ground_truth.mcf1"
    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return manifest


def load_ensemble(manifest_path: str | Path) -> Ensemble:
    """Read an ensemble from a manifest (or a directory containing one)."""
    from .formats import load_field

    path = Path(manifest_path)
    if path.is_dir():
        path = path / "manifest.json"
    doc = json.loads(path.read_text())
    base = path.parent
    members = tuple(load_field((base / rel).read_bytes()) for rel in doc["members"])
    gt = None
    if doc.get("ground_truth"):
        gt = load_field((base / doc["ground_truth"]).read_bytes())
    ens = Ensemble(
        members=members,
        ground_truth=gt,
        seed=int(doc.get("seed", 0)),
        provenance=str(doc.get("generator", "")),
    )
    if (ens.width, ens.height) != (doc["width"], doc["height"]) or ens.n != doc["n"]:
        raise ValueError("manifest metadata disagrees with member files")
    return ens
