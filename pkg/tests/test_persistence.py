import numpy as np
import pytest

from morsemaps import (
    GridTopology,
    cancellation_sequence,
    min_feature_persistence,
    segment,
    simplify_to,
    sublevel_pairs,
    superlevel_pairs,
)
from morsemaps.persistence import hierarchy_to_json

from conftest import make_grid, random_grid, ridge_from_profile
from oracles import canonical_pair_order, sweep_pairs


class TestSuperlevelPairs:
    def test_two_bumps_single_pair(self):
        g = ridge_from_profile([0.0, 1.0, 0.2, 0.6, 0.05])
        topo = GridTopology(5, 2)
        h = superlevel_pairs(g, topo)
        assert len(h.pairs) == 1
        p = h.pairs[0]
        assert g.values[p.extremum] == 0.6  # the lesser peak dies
        assert g.values[p.saddle] == 0.2
        assert g.values[p.absorber] == 1.0
        assert p.persistence == pytest.approx(0.4)
        assert g.values[h.global_extremum] == 1.0

    def test_single_maximum_no_pairs(self):
        x = np.linspace(-1, 1, 9)
        xx, yy = np.meshgrid(x, -x)
        g = make_grid(np.exp(-(xx**2 + yy**2)))
        h = superlevel_pairs(g, GridTopology(9, 9))
        assert h.pairs == ()
        assert h.n_extrema == 1

    def test_pair_count_is_maxima_minus_one(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            g = random_grid(rng, 11, 8)
            topo = GridTopology(11, 8)
            h = superlevel_pairs(g, topo)
            assert len(h.pairs) == len(segment(g, topo).maxima) - 1 == h.n_extrema - 1

    def test_matches_threshold_sweep_oracle(self):
        rng = np.random.default_rng(100)
        for trial in range(25):
            w, h_ = rng.integers(2, 14, size=2)
            g = random_grid(rng, w, h_, ties=bool(trial % 4 == 0))
            got = superlevel_pairs(g, GridTopology(w, h_))
            expected, global_ext = sweep_pairs(g.values, w, h_, "superlevel")
            assert {(p.extremum, p.saddle, p.absorber, p.persistence) for p in got.pairs} == expected
            assert got.global_extremum == global_ext

    def test_sublevel_matches_oracle(self):
        rng = np.random.default_rng(200)
        for _ in range(10):
            w, h_ = rng.integers(2, 12, size=2)
            g = random_grid(rng, w, h_)
            got = sublevel_pairs(g, GridTopology(w, h_))
            expected, global_ext = sweep_pairs(g.values, w, h_, "sublevel")
            assert {(p.extremum, p.saddle, p.absorber, p.persistence) for p in got.pairs} == expected
            assert got.global_extremum == global_ext

    def test_negation_duality(self):
        rng = np.random.default_rng(5)
        g = random_grid(rng, 10, 10)
        sup = superlevel_pairs(g, GridTopology(10, 10))
        dual = sublevel_pairs(g.negated(), GridTopology(10, 10))
        key = lambda p: (p.extremum, p.saddle, p.absorber, round(p.persistence, 12))
        assert sorted(map(key, sup.pairs)) == sorted(map(key, dual.pairs))

    def test_persistence_sum_shift_invariant(self):
        rng = np.random.default_rng(31)
        g = random_grid(rng, 9, 9)
        topo = GridTopology(9, 9)
        s1 = sum(p.persistence for p in superlevel_pairs(g, topo).pairs)
        s2 = sum(p.persistence for p in superlevel_pairs(g.shifted(19.5), topo).pairs)
        assert s1 == pytest.approx(s2, rel=1e-12)


class TestProfileMerges:
    """1D profile with six critical values a1 < ... < a6, read through the
    ascending filtration: the basins born at a3 and a2 die at a4 and a5."""

    PROFILE = [0.0, 3.0, 2.0, 4.0, 1.0, 5.0]

    def test_fig_profile_pairs(self):
        g = ridge_from_profile(self.PROFILE)
        h = sublevel_pairs(g, GridTopology(6, 2))
        got = sorted((g.values[p.extremum], g.values[p.saddle]) for p in h.pairs)
        assert got == [(1.0, 4.0), (2.0, 3.0)]
        assert g.values[h.global_extremum] == 0.0
        assert h.value_range == 5.0  # the surviving basin spans a1..a6


class TestMinFeaturePersistence:
    def test_monotone_ramp_has_no_finite_feature(self):
        r, c = np.mgrid[0:6, 0:6]
        g = make_grid((r + 2 * c).astype(np.float64))
        assert min_feature_persistence(g, GridTopology(6, 6)) == np.inf

    def test_min_over_both_filtrations(self):
        # peaks 1.0 / 0.625 with pass 0.25: max-side feature 0.375;
        # basins 0.125 / 0.25 merging over 1.0: min-side feature 0.75
        g = ridge_from_profile([0.125, 1.0, 0.25, 0.625])
        topo = GridTopology(4, 2)
        sup = superlevel_pairs(g, topo)
        sub = sublevel_pairs(g, topo)
        assert [p.persistence for p in sup.pairs] == [0.375]
        assert [p.persistence for p in sub.pairs] == [0.75]
        assert min_feature_persistence(g, topo) == 0.375


class TestSimplifyTo:
    def test_identity_at_full_count(self):
        rng = np.random.default_rng(8)
        g = random_grid(rng, 9, 7)
        topo = GridTopology(9, 7)
        seg = segment(g, topo)
        h = superlevel_pairs(g, topo)
        same = simplify_to(seg, h, len(seg.maxima))
        assert np.array_equal(same.labels, seg.labels)

    def test_minimal_pair_merges_into_absorber(self):
        # peaks A=1.0, B=0.9, C=0.8; C dies into B first, then B into A
        g = ridge_from_profile([0.0, 1.0, 0.2, 0.9, 0.75, 0.8, 0.0])
        topo = GridTopology(7, 2)
        seg = segment(g, topo)
        h = superlevel_pairs(g, topo)
        assert [round(p.persistence, 6) for p in h.pairs] == [0.05, 0.7]

        two = simplify_to(seg, h, 2)
        a_peak = seg.maxima[g.values[seg.maxima].argmax()]
        assert len(two.maxima) == 2
        # C's cell went to B, A's cell untouched
        assert set(np.unique(two.labels[seg.labels != a_peak])) <= set(two.maxima)

        one = simplify_to(seg, h, 1)
        assert list(np.unique(one.labels)) == [a_peak]

    def test_absorber_chain_resolved(self):
        # cancel both pairs at once: C's absorber B is itself dead, so C's
        # cell must land in A's cell
        g = ridge_from_profile([0.0, 1.0, 0.2, 0.9, 0.75, 0.8, 0.0])
        topo = GridTopology(7, 2)
        seg = segment(g, topo)
        one = simplify_to(seg, superlevel_pairs(g, topo), 1)
        assert len(np.unique(one.labels)) == 1

    def test_out_of_range_k(self):
        rng = np.random.default_rng(2)
        g = random_grid(rng, 8, 8)
        topo = GridTopology(8, 8)
        seg = segment(g, topo)
        h = superlevel_pairs(g, topo)
        with pytest.raises(ValueError):
            simplify_to(seg, h, 0)
        with pytest.raises(ValueError):
            simplify_to(seg, h, len(seg.maxima) + 1)

    def test_survivors_have_top_persistence(self):
        rng = np.random.default_rng(77)
        for _ in range(5):
            g = random_grid(rng, 12, 12)
            topo = GridTopology(12, 12)
            seg = segment(g, topo)
            h = superlevel_pairs(g, topo)
            m = len(seg.maxima)
            if m < 3:
                continue
            k = m // 2
            kept = set(simplify_to(seg, h, k).maxima)
            pers = {p.extremum: p.persistence for p in h.pairs}
            pers[h.global_extremum] = np.inf
            cutoff = sorted((pers[x] for x in pers), reverse=True)[k - 1]
            assert all(pers[x] >= cutoff for x in kept)

    def test_noisy_field_recovers_bump_lattice(self):
        from morsemaps import NoiseSpec, ackley, perturb

        g = ackley(128, 128)
        topo = GridTopology(128, 128)
        noisy = perturb(g, NoiseSpec.uniform_signed_magnitude(0.02), 1, seed=4).members[0]
        seg = segment(noisy, topo)
        assert len(seg.maxima) > 9
        nine = simplify_to(seg, superlevel_pairs(noisy, topo), 9)
        truth = segment(g, topo)
        true_peaks = np.array([divmod(int(m), 128) for m in truth.maxima])
        for m in nine.maxima:
            rc = np.array(divmod(int(m), 128))
            assert np.min(np.hypot(*(true_peaks - rc).T)) <= 5.0


class TestCancellationSequence:
    def test_empty_for_single_peak(self):
        x = np.linspace(-1, 1, 9)
        xx, yy = np.meshgrid(x, -x)
        g = make_grid(np.exp(-(xx**2 + yy**2)))
        h = superlevel_pairs(g, GridTopology(9, 9))
        assert cancellation_sequence(h) == []

    def test_ties_broken_by_saddle_order(self):
        # symmetric side peaks with equal spans cancel left saddle first
        g = ridge_from_profile([0.25, 1.0, 0.5, 2.0, 0.5, 1.0, 0.25])
        h = superlevel_pairs(g, GridTopology(7, 2))
        seq = cancellation_sequence(h)
        assert len(seq) == 2
        assert seq[0][3] == seq[1][3] == 0.5
        assert seq[0][0] < seq[1][0]  # saddle vertex index ascending

    def test_matches_oracle_order(self):
        rng = np.random.default_rng(55)
        g = random_grid(rng, 10, 10)
        topo = GridTopology(10, 10)
        h = superlevel_pairs(g, topo)
        expected, _ = sweep_pairs(g.values, 10, 10, "superlevel")
        oracle_seq = [(s, d, a, lam) for d, s, a, lam in canonical_pair_order(g.values, expected)]
        assert cancellation_sequence(h) == oracle_seq


def test_hierarchy_json_shape():
    g = ridge_from_profile([0.0, 1.0, 0.2, 0.6, 0.05])
    h = superlevel_pairs(g, GridTopology(5, 2))
    import json

    doc = json.loads(hierarchy_to_json(h))
    assert doc["kind"] == "superlevel"
    assert len(doc["pairs"]) == 1
    assert {"saddle", "max", "absorber", "persistence"} <= set(doc["pairs"][0])
    assert "global_max" in doc and "range" in doc
