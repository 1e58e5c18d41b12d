import numpy as np
import pytest
from scipy import ndimage

from morsemaps import (
    GridTopology,
    NoiseSpec,
    ackley,
    bound_fields,
    cluster_maxima_fallback,
    four_gaussians,
    label_member_maxima,
    mandatory_maxima,
    min_feature_persistence,
    perturb,
    segment,
)
from morsemaps.mandatory import CONNECTIVITY, MandatoryMaximum, mandatory_to_json

from conftest import make_grid, two_bumps


def region_areas(mand):
    return np.array([m.region.size for m in mand])


class TestZeroNoise:
    def test_one_region_per_peak(self):
        g = two_bumps(25, 25)
        topo = GridTopology(25, 25)
        mand = mandatory_maxima(g, g, topo)
        seg = segment(g, topo)
        assert len(mand) == len(seg.maxima) == 2
        anchors = {m.anchor for m in mand}
        assert anchors == set(int(x) for x in seg.maxima)

    def test_regions_contain_anchor_and_stay_disjoint(self):
        g = two_bumps(25, 25)
        mand = mandatory_maxima(g, g, GridTopology(25, 25))
        seen = set()
        for m in mand:
            assert m.anchor in set(m.region.tolist())
            assert not (seen & set(m.region.tolist()))
            seen |= set(m.region.tolist())

    def test_labels_ordered_by_anchor_value(self):
        g = two_bumps(25, 25)
        mand = mandatory_maxima(g, g, GridTopology(25, 25))
        values = [g.values[m.anchor] for m in sorted(mand, key=lambda m: m.label)]
        assert values == sorted(values, reverse=True)


class TestEnvelope:
    def test_inverted_envelope_rejected(self):
        g = two_bumps(9, 9)
        with pytest.raises(ValueError, match="lower exceeds upper"):
            mandatory_maxima(g, g.shifted(-0.1), GridTopology(9, 9))

    def test_interval_brackets(self):
        g = two_bumps(25, 25)
        topo = GridTopology(25, 25)
        ens = perturb(g, NoiseSpec.uniform_symmetric(0.02), 10, seed=3)
        lo, hi = bound_fields(ens)
        for m in mandatory_maxima(lo, hi, topo):
            low, high = m.interval
            assert low <= lo.values[m.anchor] <= high
            assert high == hi.values[m.region].max()

    def test_regions_connected(self):
        g = two_bumps(25, 25)
        topo = GridTopology(25, 25)
        ens = perturb(g, NoiseSpec.uniform_symmetric(0.05), 10, seed=3)
        lo, hi = bound_fields(ens)
        for m in mandatory_maxima(lo, hi, topo):
            mask = np.zeros((25, 25), dtype=bool)
            mask.flat[m.region] = True
            _, n = ndimage.label(mask, structure=CONNECTIVITY)
            assert n == 1

    def test_count_matches_truth_under_model_noise(self):
        g = ackley(128, 128)
        topo = GridTopology(128, 128)
        pf = min_feature_persistence(g, topo)
        ens = perturb(g, NoiseSpec.uniform_signed_magnitude(0.6 * pf / 2), 20, seed=5)
        lo, hi = bound_fields(ens)
        mand = mandatory_maxima(lo, hi, topo)
        assert len(mand) == 9

    def test_count_survives_multimodal_noise(self):
        g = ackley(128, 128)
        topo = GridTopology(128, 128)
        pf = min_feature_persistence(g, topo)
        spec = NoiseSpec.multimodal_mixture([(0.65, 0.3, 0.1), (0.35, -0.4, 0.12)], 0.9 * pf / 2)
        lo, hi = bound_fields(perturb(g, spec, 50, seed=7))
        assert len(mandatory_maxima(lo, hi, topo)) == 9

    def test_region_growth_with_amplitude(self):
        g = four_gaussians(96, 96)
        topo = GridTopology(96, 96)
        pf = min_feature_persistence(g, topo)
        areas = []
        for scale in (0.5, 0.8, 0.95):
            ens = perturb(g, NoiseSpec.uniform_signed_magnitude(scale * pf / 2), 20, seed=2)
            lo, hi = bound_fields(ens)
            mand = mandatory_maxima(lo, hi, topo)
            assert len(mand) == 4
            areas.append(region_areas(mand).sum())
        assert areas[0] < areas[1] < areas[2]

    def test_cleanup_persistence_prunes_small_branches(self):
        # second peak span is 0.4; a cleanup floor above that removes it
        profile = [0.0, 1.0, 0.2, 0.6, 0.05]
        g = make_grid(np.tile(profile, (2, 1)))
        topo = GridTopology(5, 2)
        assert len(mandatory_maxima(g, g, topo, cleanup_persistence=0.0)) == 2
        assert len(mandatory_maxima(g, g, topo, cleanup_persistence=0.5)) == 1
        with pytest.raises(ValueError, match="nonnegative"):
            mandatory_maxima(g, g, topo, cleanup_persistence=-1.0)


class TestLabeling:
    def _mand(self, width, height, regions):
        out = []
        for label, verts in enumerate(regions):
            out.append(
                MandatoryMaximum(
                    label=label,
                    anchor=verts[0],
                    interval=(0.0, 1.0),
                    region=np.array(verts),
                )
            )
        return out

    def test_maximum_inside_region_takes_its_label(self):
        g = two_bumps(25, 25)
        topo = GridTopology(25, 25)
        mand = mandatory_maxima(g, g, topo)
        seg = segment(g, topo)
        assign = label_member_maxima(seg, mand)
        by_anchor = {m.anchor: m.label for m in mand}
        assert assign == {int(m): by_anchor[int(m)] for m in seg.maxima}

    def test_equidistant_tie_goes_to_lower_label(self):
        # regions in columns 0 and 8 of a 9-wide strip; maximum at column 4
        values = np.zeros((3, 9))
        values[1, 4] = 1.0
        g = make_grid(values)
        seg = segment(g, GridTopology(9, 3))
        mand = self._mand(9, 3, [[9], [17]])  # (1,0) and (1,8)
        assign = label_member_maxima(seg, mand)
        assert assign[13] == 0

    def test_outside_maxima_take_nearest_region(self):
        values = np.zeros((3, 9))
        values[1, 6] = 1.0
        g = make_grid(values)
        seg = segment(g, GridTopology(9, 3))
        mand = self._mand(9, 3, [[9], [17]])
        assign = label_member_maxima(seg, mand)
        assert assign[15] == 1

    def test_empty_list_rejected(self):
        g = two_bumps(9, 9)
        seg = segment(g, GridTopology(9, 9))
        with pytest.raises(ValueError, match="empty"):
            label_member_maxima(seg, [])


class TestFallbackClustering:
    def test_tight_blobs_recovered(self):
        rng = np.random.default_rng(0)
        blobs = [(10, 10), (10, 40), (40, 10), (40, 40)]
        pts = np.concatenate([np.array(b) + rng.normal(0, 0.8, size=(20, 2)) for b in blobs])
        centers, assign = cluster_maxima_fallback(pts, 4, seed=1)
        for b in blobs:
            assert np.min(np.hypot(*(centers - b).T)) < 3.0
        for i in range(4):
            # points of one blob share a cluster
            assert len(set(assign[i * 20 : (i + 1) * 20])) == 1

    def test_permutation_stable(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 50, size=(60, 2))
        perm = rng.permutation(60)
        c1, a1 = cluster_maxima_fallback(pts, 5, seed=9)
        c2, a2 = cluster_maxima_fallback(pts[perm], 5, seed=9)
        assert np.array_equal(c1, c2)
        assert np.array_equal(a1[perm], a2)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError, match="at least"):
            cluster_maxima_fallback(np.zeros((2, 2)), 3, seed=0)

    def test_duplicated_points_fine(self):
        pts = np.array([[0.0, 0.0]] * 5 + [[10.0, 10.0]] * 5)
        centers, assign = cluster_maxima_fallback(pts, 2, seed=3)
        assert len(set(assign[:5])) == 1 and len(set(assign[5:])) == 1

    def test_recovers_peak_lattice_beyond_noise_model(self):
        # at amplitude p_f the one-to-one guarantee is gone; clustering the
        # members' surviving maxima still recovers the 3x3 peak layout
        from morsemaps import ackley, min_feature_persistence, perturb, simplify_to, superlevel_pairs

        g = ackley(128, 128)
        topo = GridTopology(128, 128)
        pf = min_feature_persistence(g, topo)
        ens = perturb(g, NoiseSpec.uniform_signed_magnitude(pf), 20, seed=6)
        points = []
        for member in ens.members:
            seg = segment(member, topo)
            nine = simplify_to(seg, superlevel_pairs(member, topo), min(9, len(seg.maxima)))
            points.extend(divmod(int(m), 128) for m in nine.maxima)
        centers, _ = cluster_maxima_fallback(np.array(points, dtype=float), 9, seed=1)
        true_seg = segment(g, topo)
        true_peaks = np.array([divmod(int(m), 128) for m in true_seg.maxima])
        for peak in true_peaks:
            assert np.min(np.hypot(*(centers - peak).T)) <= 6.0


def test_json_export_rle_roundtrips():
    g = two_bumps(17, 17)
    mand = mandatory_maxima(g, g, GridTopology(17, 17))
    import json

    docs = json.loads(mandatory_to_json(mand, 17))
    assert [d["label"] for d in docs] == [0, 1]
    for doc, m in zip(docs, mand):
        verts = []
        for start, length in doc["region_rle"]:
            verts.extend(range(start, start + length))
        assert verts == sorted(m.region.tolist())
