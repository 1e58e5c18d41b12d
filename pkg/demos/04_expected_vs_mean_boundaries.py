"""Expected boundaries versus the mean field under skewed contamination.

A minority of members carries a coherent positive bias pattern; the rest
match the ground truth. The mean field inherits the minority's pattern and
its cell boundaries drift, while the half-probability contours of the
destination vote stay anchored to the majority. The overlay draws truth in
green, mean field in red, and the expected boundaries in black.
"""

from pathlib import Path

from morsemaps import (
    GridTopology,
    ackley,
    bound_fields,
    contaminated_ensemble,
    expected_boundaries,
    mandatory_maxima,
    mean_field,
    probabilistic_map,
    segment,
    simplify_to,
    superlevel_pairs,
)
from morsemaps.contours import symmetric_distance
from morsemaps.pipeline import _segmentation_boundaries
from morsemaps.render import CATEGORICAL16, blend, overlay_contours, write_png

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

SIZE = 256
truth = ackley(SIZE, SIZE)
topo = GridTopology(SIZE, SIZE)
truth_boundary = _segmentation_boundaries(segment(truth, topo))

ensemble = contaminated_ensemble(truth, amplitude=0.4, n=50, seed=3)
lower, upper = bound_fields(ensemble)
mandatory = mandatory_maxima(lower, upper, topo)
pmap = probabilistic_map(ensemble, mandatory)
expected = expected_boundaries(pmap)

mean = mean_field(ensemble)
mean_seg = segment(mean, topo)
k = min(len(mandatory), len(mean_seg.maxima))
mean_boundary = _segmentation_boundaries(simplify_to(mean_seg, superlevel_pairs(mean, topo), k))

d_expected = symmetric_distance(expected, truth_boundary)
d_mean = symmetric_distance(mean_boundary, truth_boundary)
print(f"mean symmetric distance to the true boundaries (px):")
print(f"  expected boundaries: {d_expected:.3f}")
print(f"  mean-field boundaries: {d_mean:.3f}")
print(f"  the vote wins by a factor of {d_mean / d_expected:.1f}")

image = blend(pmap.dist, CATEGORICAL16, SIZE, SIZE)
image = overlay_contours(image, mean_boundary, (220, 30, 30))
image = overlay_contours(image, truth_boundary, (30, 160, 30))
image = overlay_contours(image, expected, (0, 0, 0))
write_png(image, OUT / "boundaries_overlay.png")
print(f"wrote {OUT / 'boundaries_overlay.png'}")
