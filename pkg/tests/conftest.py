import numpy as np
import pytest

from resokit.grid import Field, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_field(grid: Grid, rng, band_limit: int | None = None) -> Field:
    """Random complex field; optionally band-limited to |k|_inf <= band_limit
    (in integer lattice units) so products do not alias."""
    n = grid.points
    coeff = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if band_limit is not None:
        idx = np.fft.fftfreq(n) * n
        keep = (np.abs(idx[:, None]) <= band_limit) & (np.abs(idx[None, :]) <= band_limit)
        coeff = np.where(keep, coeff, 0.0)
    return Field(grid, coeff, "frequency").to_physical()
