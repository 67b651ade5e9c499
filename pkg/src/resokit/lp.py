"""Dyadic frequency decomposition, square/maximal functions and related bounds.

The dyadic bump ``theta`` is built by telescoping a single radial cut
``low(r)`` (1 for r <= 4/5, 0 for r >= 4/3):

    theta(r) = low(r/2) - low(r)

so it is supported exactly in the annulus (4/5, 8/3) -- inside the required
(3/4, 8/3) -- and the dyadic sum telescopes to exactly 1 on any range of
scales that covers the lattice.  ``low`` doubles as the low-pass completion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bumps import ramp
from .grid import FREQUENCY, Field, Grid, lp_norm, propagate

INNER = 4.0 / 5.0
OUTER = 4.0 / 3.0


class UndefinedRatioError(ArithmeticError):
    """Requested a norm ratio whose denominator vanishes."""


class BandRangeWarning(UserWarning):
    """A dyadic index outside the grid-resolvable range was requested."""


def low_cut(r) -> np.ndarray:
    """Radial low-pass profile: 1 for r <= 4/5, 0 for r >= 4/3."""
    return 1.0 - ramp(r, INNER, OUTER)


def theta(r) -> np.ndarray:
    """Radial dyadic bump, hard-supported in the annulus (4/5, 8/3)."""
    r = np.asarray(r, dtype=float)
    return low_cut(0.5 * r) - low_cut(r)


@dataclass(frozen=True)
class DyadicPartition:
    """Resolvable dyadic range for a grid: bands j_min..j_max plus a low block.

    The range is chosen so that ``low(r/2^j_min) = 0`` and
    ``low(r/2^(j_max+1)) = 1`` for every nonzero lattice frequency, which
    makes band-plus-low reconstruction exact on the lattice.
    """

    grid: Grid
    j_min: int
    j_max: int

    @classmethod
    def for_grid(cls, grid: Grid) -> "DyadicPartition":
        r_min = grid.dxi
        r_max = math.sqrt(2.0) * grid.xi_max
        j_min = math.floor(math.log2(r_min / OUTER))
        j_max = math.ceil(math.log2(r_max / INNER)) - 1
        return cls(grid=grid, j_min=j_min, j_max=j_max)

    @property
    def bands(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def band_multiplier(self, j: int) -> np.ndarray:
        r = np.sqrt(self.grid.k_sq)
        return theta(r / 2.0**j)

    def low_multiplier(self, j: int) -> np.ndarray:
        r = np.sqrt(self.grid.k_sq)
        return low_cut(r / 2.0**j)


def project_band(f: Field, j: int) -> Field:
    """P_j f; out-of-range j yields the zero field with a warning."""
    part = DyadicPartition.for_grid(f.grid)
    if j < part.j_min or j > part.j_max:
        warnings.warn(f"band {j} outside resolvable range [{part.j_min}, {part.j_max}]",
                      BandRangeWarning, stacklevel=2)
    fh = f.to_frequency()
    out = Field(f.grid, fh.values * part.band_multiplier(j), FREQUENCY)
    return out if f.rep == FREQUENCY else out.to_physical()


def project_low(f: Field, j: int) -> Field:
    """P_{<j} f (low-pass completion)."""
    part = DyadicPartition.for_grid(f.grid)
    fh = f.to_frequency()
    out = Field(f.grid, fh.values * part.low_multiplier(j), FREQUENCY)
    return out if f.rep == FREQUENCY else out.to_physical()


def square_function(f: Field) -> Field:
    """S f = (sum_j |P_j f|^2)^(1/2) over the resolvable bands."""
    part = DyadicPartition.for_grid(f.grid)
    fh = f.to_frequency().values
    acc = np.zeros((f.grid.points, f.grid.points))
    for j in part.bands:
        piece = np.fft.ifft2(fh * part.band_multiplier(j), norm="ortho")
        acc += np.abs(piece) ** 2
    return Field(f.grid, np.sqrt(acc) + 0j)


def maximal_function(f: Field) -> Field:
    """M f = sup_j |P_{<j} f| over resolvable scales (top scale acts as identity)."""
    part = DyadicPartition.for_grid(f.grid)
    fh = f.to_frequency().values
    acc = np.zeros((f.grid.points, f.grid.points))
    for j in range(part.j_min, part.j_max + 2):
        piece = np.fft.ifft2(fh * part.low_multiplier(j), norm="ortho")
        np.maximum(acc, np.abs(piece), out=acc)
    return Field(f.grid, acc + 0j)


def bernstein_ratio(f: Field, j: int, p: float, q: float) -> float:
    """||P_j f||_p / (2^(2j(1/q - 1/p)) ||P_j f||_q) for 1 <= q <= p <= inf."""
    if not (1 <= q <= p):
        raise ValueError(f"need 1 <= q <= p, got p={p}, q={q}")
    pj = project_band(f, j)
    denom = lp_norm(pj, q)
    if denom == 0.0:
        raise UndefinedRatioError(f"P_{j} f vanishes; Bernstein ratio undefined")
    inv_p = 0.0 if np.isinf(p) else 1.0 / p
    inv_q = 0.0 if np.isinf(q) else 1.0 / q
    scale = 2.0 ** (2.0 * j * (inv_q - inv_p))
    return lp_norm(pj, p) / (scale * denom)


def z_profile(r) -> np.ndarray:
    """Smooth monotone Z: 1 for r <= 1, 1/r for r >= 2, log-convex blend between."""
    r = np.asarray(r, dtype=float)
    s = ramp(r, 1.0, 2.0)
    safe = np.where(r > 0, r, 1.0)
    return np.exp(-s * np.log(safe))


def lambda_multiplier(alpha: float, t: float, r: np.ndarray) -> np.ndarray:
    """Frequency symbol of the smoothed fractional integration of order alpha."""
    return t ** (0.5 * alpha) * z_profile(np.sqrt(t) * r) ** alpha


def lambda_op(f: Field, alpha: float, t: float) -> Field:
    """Apply t^(a/2) Z(sqrt(t)|D|)^a; identity for alpha = 0."""
    if alpha < 0:
        raise ValueError(f"order must be >= 0, got {alpha}")
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    fh = f.to_frequency()
    mult = lambda_multiplier(alpha, t, np.sqrt(f.grid.k_sq))
    out = Field(f.grid, fh.values * mult, FREQUENCY)
    return out if f.rep == FREQUENCY else out.to_physical()


def check_gagnir(f: Field, t: float) -> tuple[float, float]:
    """Both sides of the pseudo-conformal interpolation inequality.

    Returns ``(lhs, rhs)`` with ``lhs = ||U(-t)(x f)||_4^2`` (Euclidean
    magnitude over the two coordinate components) and
    ``rhs = ||U(-t) f||_inf * ||U(-t)(|x|^2 f)||_2``.
    """
    g = f.grid
    v = f.to_physical().values
    comps = [Field(g, g.x1 * v), Field(g, g.x2 * v)]
    evolved = [propagate(c, -t).values for c in comps]
    mag = Field(g, np.sqrt(np.abs(evolved[0]) ** 2 + np.abs(evolved[1]) ** 2) + 0j)
    lhs = lp_norm(mag, 4.0) ** 2
    sup = lp_norm(propagate(f, -t), np.inf)
    x2f = Field(g, (g.x1**2 + g.x2**2) * v)
    rhs = sup * lp_norm(propagate(x2f, -t), 2.0)
    return lhs, rhs
