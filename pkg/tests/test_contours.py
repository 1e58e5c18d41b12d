import numpy as np

from morsemaps.contours import chain_segments, marching_squares, segment_key, symmetric_distance


class TestMarchingSquares:
    def test_vertical_step_at_midpoint(self):
        f = np.zeros((5, 8))
        f[:, 4:] = 1.0
        segs = marching_squares(f, 0.5)
        pts = np.array([p for s in segs for p in s])
        assert np.allclose(pts[:, 1], 3.5)
        assert len(segs) == 4  # one crossing per cell row

    def test_closed_loop_around_bump(self):
        x = np.linspace(-1, 1, 41)
        xx, yy = np.meshgrid(x, x)
        f = 1.0 - np.hypot(xx, yy)
        # isovalue chosen off the lattice values so the curve has no pinches
        segs = marching_squares(f, 0.497)
        lines = chain_segments(segs)
        assert len(lines) == 1
        line = np.asarray(lines[0])
        assert np.allclose(line[0], line[-1])  # closed
        radii = np.hypot(*(line - 20.0).T) / 20.0
        assert np.allclose(radii, 0.503, atol=0.03)

    def test_no_crossings_when_flat(self):
        assert marching_squares(np.zeros((4, 4)), 0.5) == []

    def test_values_at_iso_count_as_outside(self):
        f = np.full((3, 3), 0.5)
        assert marching_squares(f, 0.5) == []

    def test_interpolation_position(self):
        f = np.array([[0.0, 1.0], [0.0, 1.0]])
        segs = marching_squares(f, 0.25)
        pts = np.array([p for s in segs for p in s])
        assert np.allclose(pts[:, 1], 0.25)


class TestChaining:
    def test_chains_collinear_segments(self):
        segs = [((0.0, 0.0), (0.0, 1.0)), ((0.0, 1.0), (0.0, 2.0)), ((0.0, 2.0), (0.0, 3.0))]
        lines = chain_segments(segs)
        assert len(lines) == 1
        assert len(lines[0]) == 4

    def test_separate_components_stay_separate(self):
        segs = [((0.0, 0.0), (0.0, 1.0)), ((5.0, 0.0), (5.0, 1.0))]
        assert len(chain_segments(segs)) == 2

    def test_key_orientation_independent(self):
        a = ((1.0, 2.0), (3.0, 4.0))
        b = ((3.0, 4.0), (1.0, 2.0))
        assert segment_key(a) == segment_key(b)


class TestSymmetricDistance:
    def test_identical_sets_zero(self):
        line = [[(0.0, 0.0), (0.0, 10.0)]]
        assert symmetric_distance(line, line) == 0.0

    def test_parallel_lines_offset(self):
        a = [[(0.0, 0.0), (0.0, 10.0)]]
        b = [[(3.0, 0.0), (3.0, 10.0)]]
        assert abs(symmetric_distance(a, b) - 3.0) < 1e-9

    def test_empty_cases(self):
        assert symmetric_distance([], []) == 0.0
        assert symmetric_distance([[(0.0, 0.0), (1.0, 1.0)]], []) == float("inf")
