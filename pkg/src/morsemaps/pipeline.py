"""End-to-end runs: generate, perturb, compute artifacts, render images.

A run directory accumulates the pipeline's products: the ground truth and
member fields, the computed maps in their binary formats, boundary
polylines, and a machine-readable run summary. Every artifact writer is
deterministic for a fixed configuration.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import formats, render
from .contours import chain_segments, marching_squares, segment_key
from .ensemble import (
    Ensemble,
    NoiseSpec,
    ackley,
    bound_fields,
    four_gaussians,
    himmelblau,
    load_ensemble,
    mean_field,
    perturb,
    save_ensemble,
)
from .grid import GridTopology, ScalarGrid, classify_all
from .mandatory import cluster_maxima_fallback, mandatory_maxima, mandatory_to_json
from .persistence import hierarchy_to_json, min_feature_persistence, simplify_to, superlevel_pairs
from .segmentation import Segmentation, segment
from .summary import (
    ProbabilisticMap,
    agreement_cells,
    certainty_partition,
    expected_boundaries,
    probabilistic_map,
    quantize,
    survival_map,
)

__all__ = ["PipelineConfig", "ConfigError", "DataError", "synth_run", "perturb_run", "compute_run", "render_run", "query_run"]

GENERATORS = {"ackley": ackley, "himmelblau": himmelblau, "four-gaussians": four_gaussians}
NOISE_KINDS = {
    "uniform": "uniform_symmetric",
    "uniform-signed": "uniform_signed_magnitude",
    "gaussian": "gaussian_truncated",
    "multimodal": "multimodal_mixture",
}
# Bimodal mixture used when no explicit components are given: two skewed
# modes, means and widths relative to the amplitude bound.
DEFAULT_MULTIMODAL = ((0.65, 0.75, 0.12), (0.35, -0.55, 0.18))


class ConfigError(ValueError):
    """Invalid configuration (exit code 2)."""


class DataError(ValueError):
    """Missing or inconsistent data (exit code 3)."""


_CONFIG_KEYS = {
    "input",
    "noise",
    "n",
    "seed",
    "scale",
    "amplitude",
    "sigma",
    "l_override",
    "cleanup_persistence",
    "survival_normalization",
    "quantization_k",
    "agreement_thresholds",
    "output_dir",
}


@dataclass
class PipelineConfig:
    """Validated pipeline parameters; unknown keys are rejected."""

    input: dict = dc_field(default_factory=dict)
    noise: str = "uniform-signed"
    n: int = 50
    seed: int = 7
    scale: float | None = 0.6
    amplitude: float | None = None
    sigma: float | None = None
    l_override: int | None = None
    cleanup_persistence: float = 0.0
    survival_normalization: str = "none"
    quantization_k: int = 9
    agreement_thresholds: tuple[float, ...] = (0.95, 0.8, 0.6)
    output_dir: str = "run"

    def __post_init__(self):
        if self.noise not in NOISE_KINDS:
            raise ConfigError(f"unknown noise {self.noise!r}, expected one of {sorted(NOISE_KINDS)}")
        if self.n < 1:
            raise ConfigError(f"n must be positive, got {self.n}")
        if (self.scale is None) == (self.amplitude is None):
            raise ConfigError("exactly one of scale or amplitude must be set")
        if self.scale is not None and self.scale < 0:
            raise ConfigError("scale must be nonnegative")
        if self.amplitude is not None and self.amplitude < 0:
            raise ConfigError("amplitude must be nonnegative")
        if self.cleanup_persistence < 0:
            raise ConfigError("cleanup_persistence must be nonnegative")
        if self.survival_normalization not in ("none", "by_member_total"):
            raise ConfigError(f"unknown survival normalization {self.survival_normalization!r}")
        if self.quantization_k < 1:
            raise ConfigError("quantization_k must be positive")
        for a in self.agreement_thresholds:
            if not (0.5 < a <= 1.0):
                raise ConfigError(f"agreement threshold {a} outside (0.5, 1]")
        if self.l_override is not None and self.l_override < 1:
            raise ConfigError("l_override must be positive")

    @classmethod
    def from_json(cls, doc: dict) -> "PipelineConfig":
        unknown = set(doc) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(doc)
        if kwargs.get("amplitude") is not None and "scale" not in kwargs:
            kwargs["scale"] = None
        if "agreement_thresholds" in kwargs:
            kwargs["agreement_thresholds"] = tuple(kwargs["agreement_thresholds"])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def _noise_spec(config: PipelineConfig, ground_truth: ScalarGrid, topology: GridTopology) -> tuple[NoiseSpec, float]:
    """Resolve the noise amplitude (scale is relative to half the smallest
    feature persistence of the ground truth) and build the spec."""
    p_f = min_feature_persistence(ground_truth, topology)
    if config.amplitude is not None:
        a = config.amplitude
    else:
        if not np.isfinite(p_f):
            raise DataError("ground truth has no finite feature, cannot scale noise")
        a = config.scale * p_f / 2.0
    kind = NOISE_KINDS[config.noise]
    if kind == "gaussian_truncated":
        sigma = config.sigma if config.sigma is not None else a / 2.0
        return NoiseSpec.gaussian_truncated(sigma, a), p_f
    if kind == "multimodal_mixture":
        comps = tuple((w, m * a, s * a) for w, m, s in DEFAULT_MULTIMODAL)
        return NoiseSpec.multimodal_mixture(comps, a), p_f
    return NoiseSpec(kind, a), p_f


def synth_run(directory: str | Path, fn: str, width: int, height: int) -> Path:
    """Write a generated ground-truth field into the run directory."""
    if fn not in GENERATORS:
        raise ConfigError(f"unknown generator {fn!r}, expected one of {sorted(GENERATORS)}")
    if width < 2 or height < 2:
        raise ConfigError(f"size must be at least 2x2, got {width}x{height}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    grid = GENERATORS[fn](width, height)
    (directory / "ground_truth.mcf1").write_bytes(formats.save_field(grid))
    (directory / "synth.json").write_text(
        json.dumps({"fn": fn, "width": width, "height": height}, sort_keys=True) + "\n"
    )
    return directory / "ground_truth.mcf1"


def perturb_run(directory: str | Path, config: PipelineConfig) -> Path:
    """Draw ensemble members around the run's ground truth; returns the manifest."""
    directory = Path(directory)
    gt_path = directory / "ground_truth.mcf1"
    if not gt_path.exists():
        raise DataError(f"no ground truth at {gt_path}")
    grid = formats.load_field(gt_path.read_bytes())
    topology = GridTopology(grid.width, grid.height)
    spec, p_f = _noise_spec(config, grid, topology)
    ens = perturb(grid, spec, config.n, config.seed)
    manifest = save_ensemble(directory, ens)
    (directory / "noise.json").write_text(
        json.dumps({"noise": spec.to_json_dict(), "p_f": p_f, "scale": config.scale}, sort_keys=True) + "\n"
    )
    return manifest


def _segmentation_boundaries(seg: Segmentation) -> list:
    """Cell boundaries of a segmentation as half-crossing polylines."""
    seen = set()
    unique = []
    rows_shape = (seg.height, seg.width)
    for m in seg.maxima:
        indicator = (seg.labels == m).astype(np.float64).reshape(rows_shape)
        for s in marching_squares(indicator, 0.5):
            k = segment_key(s)
            if k not in seen:
                seen.add(k)
                unique.append(s)
    return chain_segments(unique)


def compute_run(directory: str | Path, config: PipelineConfig, manifest: str | Path | None = None) -> dict:
    """Compute all summary artifacts for an ensemble run directory."""
    t_start = time.perf_counter()
    directory = Path(directory)
    manifest = Path(manifest) if manifest else directory / "manifest.json"
    if not manifest.exists():
        raise DataError(f"no ensemble manifest at {manifest}")
    ens = load_ensemble(manifest)
    topology = GridTopology(ens.width, ens.height)
    w, h = ens.width, ens.height

    mean = mean_field(ens)
    lo, hi = bound_fields(ens)
    reference = ens.ground_truth if ens.ground_truth is not None else mean
    p_f = min_feature_persistence(reference, topology)

    t0 = time.perf_counter()
    mandatory = mandatory_maxima(lo, hi, topology, config.cleanup_persistence)
    l = len(mandatory)
    t_mandatory = time.perf_counter() - t0

    t0 = time.perf_counter()
    if config.l_override is not None:
        pmap = _fallback_pmap(ens, topology, config.l_override, config.seed)
    else:
        pmap = probabilistic_map(ens, mandatory)
    t_pmap = time.perf_counter() - t0

    t0 = time.perf_counter()
    smap = survival_map(ens, config.survival_normalization)
    t_smap = time.perf_counter() - t0

    # Reference boundaries at the same label count for comparison overlays.
    mean_seg = segment(mean, topology)
    k = min(pmap.l, len(mean_seg.maxima))
    mean_simplified = simplify_to(mean_seg, superlevel_pairs(mean, topology), k)
    boundaries = {
        "expected": expected_boundaries(pmap),
        "meanfield": _segmentation_boundaries(mean_simplified),
    }
    truth_maxima = None
    if ens.ground_truth is not None:
        truth_seg = segment(ens.ground_truth, topology)
        truth_maxima = len(truth_seg.maxima)
        boundaries["truth"] = _segmentation_boundaries(truth_seg)

    directory.mkdir(parents=True, exist_ok=True)
    (directory / "mean_field.mcf1").write_bytes(formats.save_field(mean))
    (directory / "seg_mean.msg1").write_bytes(formats.save_segmentation(mean_simplified))
    if ens.ground_truth is not None:
        (directory / "seg_truth.msg1").write_bytes(formats.save_segmentation(segment(ens.ground_truth, topology)))
        (directory / "hierarchy_truth.json").write_text(
            hierarchy_to_json(superlevel_pairs(ens.ground_truth, topology)) + "\n"
        )
    (directory / "mandatory.json").write_text(mandatory_to_json(mandatory, w) + "\n")
    (directory / "pmap.pmp1").write_bytes(formats.save_pmap_counts(w, h, pmap.n, pmap.counts))
    (directory / "smap.svm1").write_bytes(formats.save_survival_values(w, h, smap.values))
    (directory / "smap_meta.json").write_text(
        json.dumps(
            {"normalization": smap.normalization, "member_totals": list(smap.member_totals)},
            sort_keys=True,
            separators=(",", ":"),
        )
        + "\n"
    )
    (directory / "boundaries.json").write_text(
        json.dumps(boundaries, sort_keys=True, separators=(",", ":")) + "\n"
    )
    (directory / "anchors.json").write_text(
        json.dumps({"anchors": [[a // w, a % w] for a in pmap.anchors],
                    "thresholds": list(config.agreement_thresholds)}, sort_keys=True) + "\n"
    )

    kinds, _ = classify_all(reference, topology)
    certain_labels, uncertain = certainty_partition(pmap)
    summary = {
        "width": w,
        "height": h,
        "n": ens.n,
        "l": l,
        "p_f": p_f,
        "counts": {
            "mandatory_maxima": l,
            "reference_maxima": int((kinds == 3).sum()),
            "truth_maxima": truth_maxima,
            "certain_vertices": int(w * h - uncertain.size),
            "uncertain_vertices": int(uncertain.size),
        },
        "l_override": config.l_override,
        "cleanup_persistence": config.cleanup_persistence,
        "survival_normalization": config.survival_normalization,
        "timings": {
            "mandatory_s": round(t_mandatory, 3),
            "probabilistic_map_s": round(t_pmap, 3),
            "survival_map_s": round(t_smap, 3),
            "total_s": round(time.perf_counter() - t_start, 3),
        },
    }
    (directory / "run_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _fallback_pmap(ens: Ensemble, topology: GridTopology, l: int, seed: int) -> ProbabilisticMap:
    """Position-clustered labeling for ensembles outside the noise model."""
    w, h = ens.width, ens.height
    simplified = []
    points = []
    for member in ens.members:
        seg = segment(member, topology)
        k = min(l, len(seg.maxima))
        sseg = simplify_to(seg, superlevel_pairs(member, topology), k)
        simplified.append(sseg)
        for m in sseg.maxima:
            points.append((m // w, m % w))
    if len(points) < l:
        raise DataError(f"only {len(points)} maxima across members, cannot form {l} clusters")
    centers, assignment = cluster_maxima_fallback(np.array(points, dtype=np.float64), l, seed)
    # Canonical label order: descending mean ground-level row-major position
    # is arbitrary; order clusters by their center, lexicographically.
    order = np.lexsort((centers[:, 1], centers[:, 0]))
    relabel = np.empty(l, dtype=np.int64)
    relabel[order] = np.arange(l)
    counts = np.zeros(w * h * l, dtype=np.int64)
    base = np.arange(w * h) * l
    cursor = 0
    for i, sseg in enumerate(simplified):
        lut = np.zeros(w * h, dtype=np.int64)
        for m in sseg.maxima:
            lut[m] = relabel[assignment[cursor]]
            cursor += 1
        labels = lut[sseg.labels]
        counts += np.bincount(base + labels, minlength=counts.size)
    anchors = tuple(int(round(r)) * w + int(round(c)) for r, c in centers[order])
    return ProbabilisticMap(w, h, ens.n, counts.reshape(w * h, l), anchors)


def render_run(directory: str | Path) -> list[Path]:
    """Write PNG visualizations for a computed run directory."""
    directory = Path(directory)
    pmap = _load_pmap(directory)
    w, h = pmap.width, pmap.height
    _, _, svals = formats.load_survival_values((directory / "smap.svm1").read_bytes())
    anchors_doc = json.loads((directory / "anchors.json").read_text())
    thresholds = anchors_doc.get("thresholds", [0.95, 0.8, 0.6])
    boundaries = json.loads((directory / "boundaries.json").read_text())

    out = directory / "render"
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def save(name: str, image: np.ndarray) -> None:
        path = out / name
        render.write_png(image, path)
        written.append(path)

    palette = render.CATEGORICAL16
    blended = render.blend(pmap.dist, palette, w, h)
    save("pmap.png", blended)

    certain, _ = certainty_partition(pmap)
    save("certainty.png", render.categorical(certain, palette, w, h))

    for a in thresholds:
        save(f"cells_a{a:.2f}.png", render.categorical(agreement_cells(pmap, a), palette, w, h))

    save("survival.png", render.heatmap(svals, w, h))
    bins = quantize(svals, 9)
    save("survival_q.png", render.categorical(bins % len(palette), palette, w, h))

    img = blended
    for kind, color in (("meanfield", (220, 30, 30)), ("truth", (30, 160, 30)), ("expected", (0, 0, 0))):
        if kind in boundaries:
            img = render.overlay_contours(img, boundaries[kind], color)
    save("boundaries.png", img)
    return written


def _load_pmap(directory: Path) -> ProbabilisticMap:
    path = directory / "pmap.pmp1"
    if not path.exists():
        raise DataError(f"no probabilistic map at {path}")
    w, h, n, counts = formats.load_pmap_counts(path.read_bytes())
    anchors: tuple[int, ...] = ()
    anchors_path = directory / "anchors.json"
    if anchors_path.exists():
        doc = json.loads(anchors_path.read_text())
        anchors = tuple(r * w + c for r, c in doc["anchors"])
    return ProbabilisticMap(w, h, n, counts, anchors)


def query_run(directory: str | Path, r: int, c: int) -> dict:
    """Distribution at one grid point, exactly as served by the query API."""
    from .summary import query

    pmap = _load_pmap(Path(directory))
    try:
        labels, probs = query(pmap, r, c)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    return {"r": r, "c": c, "labels": labels, "probabilities": probs}
