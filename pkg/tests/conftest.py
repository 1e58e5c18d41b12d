import numpy as np
import pytest

from morsemaps import GridTopology, ScalarGrid


@pytest.fixture
def topo8():
    return GridTopology(8, 8)


def make_grid(values) -> ScalarGrid:
    values = np.asarray(values, dtype=np.float64)
    h, w = values.shape
    return ScalarGrid(w, h, values)


def ridge_from_profile(profile, rows: int = 2) -> ScalarGrid:
    """Replicate a 1D profile over identical rows; the index tie-break keeps
    the merge structure of the 1D function."""
    profile = np.asarray(profile, dtype=np.float64)
    return make_grid(np.tile(profile, (rows, 1)))


def two_bumps(width=33, height=33, sep=0.5, amps=(1.0, 0.6)) -> ScalarGrid:
    # widths chosen so the tails keep a healthy slope up to the boundary
    x = np.linspace(-1, 1, width)
    y = np.linspace(1, -1, height)
    xx, yy = np.meshgrid(x, y)
    f = amps[0] * np.exp(-((xx + sep) ** 2 + yy**2) / 0.3)
    f += amps[1] * np.exp(-((xx - sep) ** 2 + yy**2) / 0.3)
    return make_grid(f)


def random_grid(rng, width, height, ties=False) -> ScalarGrid:
    if ties:
        values = rng.integers(0, 6, size=(height, width)).astype(np.float64)
    else:
        values = rng.normal(size=(height, width))
    return make_grid(values)


def random_bumpy_grid(rng, width, height, n_bumps) -> ScalarGrid:
    """Smooth random field with few maxima, for survival replay checks."""
    x = np.linspace(0, 1, width)
    y = np.linspace(1, 0, height)
    xx, yy = np.meshgrid(x, y)
    f = np.zeros_like(xx)
    for _ in range(n_bumps):
        cx, cy = rng.uniform(0.15, 0.85, size=2)
        amp = rng.uniform(0.5, 1.5)
        sigma = rng.uniform(0.12, 0.3)
        f += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2))
    return make_grid(f)
