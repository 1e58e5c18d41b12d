"""Destination probabilities for an uncertain nine-peak surface.

Builds a 50-member ensemble around the negated Ackley surface with bounded
uniform noise, extracts the guaranteed maxima of the envelope, and renders
the per-point distribution of gradient-flow destinations: the blended
probability map, the certain/uncertain partition, and a few point queries.
"""

from pathlib import Path

import numpy as np

from morsemaps import (
    GridTopology,
    NoiseSpec,
    ackley,
    agreement_cells,
    bound_fields,
    certainty_partition,
    mandatory_maxima,
    min_feature_persistence,
    perturb,
    probabilistic_map,
    query,
)
from morsemaps.render import CATEGORICAL16, blend, categorical, write_png

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

SIZE = 256
truth = ackley(SIZE, SIZE)
topo = GridTopology(SIZE, SIZE)
p_f = min_feature_persistence(truth, topo)
print(f"smallest feature span of the truth: {p_f:.4f}")

# noise bounded well inside half the smallest feature span
spec = NoiseSpec.uniform_signed_magnitude(0.6 * p_f / 2)
ensemble = perturb(truth, spec, n=50, seed=7)
lower, upper = bound_fields(ensemble)

mandatory = mandatory_maxima(lower, upper, topo)
print(f"guaranteed maxima: {len(mandatory)}")
for m in mandatory:
    r, c = divmod(m.anchor, SIZE)
    print(f"  label {m.label}: anchor ({r:3d},{c:3d}), value interval "
          f"[{m.interval[0]:.3f}, {m.interval[1]:.3f}], region {m.region.size} px")

pmap = probabilistic_map(ensemble, mandatory)
write_png(blend(pmap.dist, CATEGORICAL16, SIZE, SIZE), OUT / "ackley_pmap.png")

certain, uncertain = certainty_partition(pmap)
write_png(categorical(certain, CATEGORICAL16, SIZE, SIZE), OUT / "ackley_certainty.png")
print(f"certain points: {SIZE * SIZE - uncertain.size} / {SIZE * SIZE} "
      f"({100 * (1 - uncertain.size / (SIZE * SIZE)):.1f}%)")

# point queries: domain center plus a fuzzy point near a cell boundary
for r, c in [(SIZE // 2, SIZE // 2), tuple(divmod(int(uncertain[uncertain.size // 2]), SIZE))]:
    labels, probs = query(pmap, r, c)
    top = sorted(zip(labels, probs), key=lambda t: -t[1])[:3]
    print(f"query ({r},{c}): " + ", ".join(f"label {l}: {p:.2f}" for l, p in top if p > 0))

for a in (0.95, 0.8, 0.6):
    cells = agreement_cells(pmap, a)
    write_png(categorical(cells, CATEGORICAL16, SIZE, SIZE), OUT / f"ackley_cells_a{a:.2f}.png")
    print(f"agreement {a:.0%}: {int((cells >= 0).sum())} px assigned")

print(f"wrote images to {OUT}")
