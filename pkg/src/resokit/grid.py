"""Periodic planar grid, complex fields, free propagator and weighted norms.

Conventions fixed here once:

* the physical box is the centered square ``[-L/2, L/2)^2`` sampled on an
  ``N x N`` lattice (``N`` even),
* the dual lattice carries the continuum frequencies ``xi = (2*pi/L) * k``
  with integer ``k`` in ``[-N/2, N/2)`` (``numpy.fft`` layout),
* the discrete Fourier transform is unitary (``norm="ortho"``), so Plancherel
  is exact and round trips are lossless to machine precision,
* the free propagator at time ``t`` multiplies frequency coefficients by
  ``exp(-i*t*|xi|^2)``.

Symbols and multipliers are always evaluated at the continuum frequencies,
never at raw integer indices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class ConfigurationError(ValueError):
    """Raised when a grid or experiment configuration violates a precondition."""


class BoundaryContaminationWarning(UserWarning):
    """Emitted when a weighted norm is requested for data that touches the box boundary."""


@dataclass(frozen=True)
class Grid:
    """Centered periodic square of side ``box_size`` with ``points`` samples per axis.

    Parameters
    ----------
    box_size : float
        Side length L of the box; coordinates live in [-L/2, L/2).
    points : int
        Samples per axis N; must be even and >= 8.
    """

    box_size: float
    points: int

    def __post_init__(self) -> None:
        if self.points % 2 != 0 or self.points < 8:
            raise ConfigurationError(f"points must be even and >= 8, got {self.points}")
        if not self.box_size > 0:
            raise ConfigurationError(f"box_size must be positive, got {self.box_size}")

    @property
    def dx(self) -> float:
        return self.box_size / self.points

    @property
    def dxi(self) -> float:
        """Dual lattice spacing 2*pi/L."""
        return 2.0 * np.pi / self.box_size

    @property
    def xi_max(self) -> float:
        """Largest resolved frequency magnitude per axis, pi*N/L."""
        return np.pi * self.points / self.box_size

    @property
    def x1(self) -> np.ndarray:
        n = self.points
        return (-0.5 * self.box_size + self.dx * np.arange(n))[:, None] * np.ones((1, n))

    @property
    def x2(self) -> np.ndarray:
        n = self.points
        return np.ones((n, 1)) * (-0.5 * self.box_size + self.dx * np.arange(n))[None, :]

    @property
    def k1(self) -> np.ndarray:
        """Frequencies along axis 0, fft layout, shape (N, N)."""
        f = self.dxi * self.points * np.fft.fftfreq(self.points)
        return f[:, None] * np.ones((1, self.points))

    @property
    def k2(self) -> np.ndarray:
        f = self.dxi * self.points * np.fft.fftfreq(self.points)
        return np.ones((self.points, 1)) * f[None, :]

    @property
    def k_sq(self) -> np.ndarray:
        return self.k1**2 + self.k2**2

    def xi_flat(self) -> np.ndarray:
        """All lattice frequencies as an (N*N, 2) array, row-major flattening."""
        return np.stack([self.k1.ravel(), self.k2.ravel()], axis=-1)


PHYSICAL = "physical"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class Field:
    """Immutable complex field on a :class:`Grid` in one of two representations."""

    grid: Grid
    values: np.ndarray = field(repr=False)
    rep: str = PHYSICAL

    def __post_init__(self) -> None:
        n = self.grid.points
        if self.values.shape != (n, n):
            raise ConfigurationError(f"values shape {self.values.shape} != {(n, n)}")
        if self.rep not in (PHYSICAL, FREQUENCY):
            raise ConfigurationError(f"unknown representation {self.rep!r}")
        v = np.ascontiguousarray(self.values, dtype=np.complex128)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def to_physical(self) -> "Field":
        if self.rep == PHYSICAL:
            return self
        return Field(self.grid, np.fft.ifft2(self.values, norm="ortho"), PHYSICAL)

    def to_frequency(self) -> "Field":
        if self.rep == FREQUENCY:
            return self
        return Field(self.grid, np.fft.fft2(self.values, norm="ortho"), FREQUENCY)

    def __add__(self, other: "Field") -> "Field":
        a, b = _align(self, other)
        return Field(a.grid, a.values + b.values, a.rep)

    def __sub__(self, other: "Field") -> "Field":
        a, b = _align(self, other)
        return Field(a.grid, a.values - b.values, a.rep)

    def __mul__(self, scalar: complex) -> "Field":
        return Field(self.grid, self.values * scalar, self.rep)

    __rmul__ = __mul__

    def conj(self) -> "Field":
        """Complex conjugate (a physical-space operation)."""
        return Field(self.grid, np.conj(self.to_physical().values), PHYSICAL)


def _align(a: Field, b: Field) -> tuple[Field, Field]:
    if a.grid != b.grid:
        raise ConfigurationError("fields live on different grids")
    if a.rep != b.rep:
        b = b.to_physical() if a.rep == PHYSICAL else b.to_frequency()
    return a, b


def zero_field(grid: Grid) -> Field:
    return Field(grid, np.zeros((grid.points, grid.points), dtype=np.complex128))


def make_grid(box_size: float, points: int) -> Grid:
    """Build a grid; rejects odd ``points`` or non-positive ``box_size``."""
    return Grid(box_size=box_size, points=points)


@dataclass(frozen=True)
class PropagatorConvention:
    """Fixed sign convention: the free flow acts in frequency as exp(-i*t*|xi|^2).

    With this choice the profile of a freely evolving field is constant in
    time, and the physical solution is recovered from the profile by applying
    the propagator at ``-t``.
    """

    def freq_symbol(self, t: float, k_sq: np.ndarray) -> np.ndarray:
        return np.exp(-1j * t * k_sq)


PROPAGATOR = PropagatorConvention()


def propagate(f: Field, t: float) -> Field:
    """Apply the free flow for time ``t``; unitary on the discrete L2 norm."""
    fh = f.to_frequency()
    out = Field(f.grid, fh.values * PROPAGATOR.freq_symbol(t, f.grid.k_sq), FREQUENCY)
    return out if f.rep == FREQUENCY else out.to_physical()


def lp_norm(f: Field, p: float) -> float:
    """Discrete Lebesgue norm with quadrature weight; p may be ``inf``."""
    v = f.to_physical().values
    if np.isinf(p):
        return float(np.max(np.abs(v)))
    if p < 1:
        raise ConfigurationError(f"Lebesgue exponent must be >= 1, got {p}")
    cell = f.grid.dx**2
    return float((np.sum(np.abs(v) ** p) * cell) ** (1.0 / p))


def l2_norm(f: Field) -> float:
    """L2 norm, computable in either representation (Plancherel is exact)."""
    return float(np.linalg.norm(f.values) * f.grid.dx)


def boundary_fraction(f: Field, margin: float = 0.125) -> float:
    """Fraction of the L2 mass within ``margin * L`` of the box boundary."""
    g = f.grid
    v = f.to_physical().values
    cut = 0.5 * g.box_size - margin * g.box_size
    mask = (np.abs(g.x1) > cut) | (np.abs(g.x2) > cut)
    total = np.sum(np.abs(v) ** 2)
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(v[mask]) ** 2) / total)


def weighted_norm(
    f: Field,
    weight: int,
    p: float,
    boundary_threshold: float = 1e-8,
) -> float:
    """``|| <x>^w f ||_p`` for w in {0, 1, 2}; w = 2 uses the plain |x|^2 weight.

    For w >= 1 a :class:`BoundaryContaminationWarning` is raised when more
    than ``boundary_threshold`` of the mass sits near the box boundary, where
    centered weights stop being meaningful.
    """
    if weight not in (0, 1, 2):
        raise ConfigurationError(f"weight power must be 0, 1 or 2, got {weight}")
    g = f.grid
    v = f.to_physical().values
    if weight >= 1 and boundary_fraction(f) > boundary_threshold:
        warnings.warn(
            f"boundary mass fraction exceeds {boundary_threshold}; "
            "weighted norm may be contaminated by the periodic wrap",
            BoundaryContaminationWarning,
            stacklevel=2,
        )
    if weight == 0:
        w = 1.0
    elif weight == 1:
        w = np.sqrt(1.0 + g.x1**2 + g.x2**2)
    else:
        w = g.x1**2 + g.x2**2
    wf = Field(g, w * v, PHYSICAL)
    return lp_norm(wf, p)


def coordinate_weighted(f: Field, weight: int) -> list[Field]:
    """Return [x1*f, x2*f] for weight 1, or [|x|^2 f] for weight 2."""
    g = f.grid
    v = f.to_physical().values
    if weight == 1:
        return [Field(g, g.x1 * v, PHYSICAL), Field(g, g.x2 * v, PHYSICAL)]
    if weight == 2:
        return [Field(g, (g.x1**2 + g.x2**2) * v, PHYSICAL)]
    raise ConfigurationError(f"weight must be 1 or 2, got {weight}")


def gaussian(grid: Grid, amplitude: float = 1.0, width: float = 1.0,
             offset: tuple[float, float] = (0.0, 0.0)) -> Field:
    """amplitude * exp(-|x - offset|^2 / (2 width^2)) sampled on the grid."""
    r2 = (grid.x1 - offset[0]) ** 2 + (grid.x2 - offset[1]) ** 2
    return Field(grid, amplitude * np.exp(-r2 / (2.0 * width**2)) + 0j, PHYSICAL)


def embed(f: Field, factor: int) -> Field:
    """Zero-pad ``f`` into a ``factor`` times larger box at the same resolution.

    The physical samples of the small box are a subset of the big box's
    lattice (N even makes the index offset integral), so embedding is exact
    for data that vanishes near the small box boundary.
    """
    if factor == 1:
        return f.to_physical()
    g = f.grid
    big = Grid(g.box_size * factor, g.points * factor)
    out = np.zeros((big.points, big.points), dtype=np.complex128)
    off = (factor - 1) * g.points // 2
    out[off:off + g.points, off:off + g.points] = f.to_physical().values
    return Field(big, out, PHYSICAL)


def save_snapshot(path, f: Field) -> None:
    """Field snapshot: npz archive with box_size, points, rep and row-major values."""
    np.savez(
        path,
        box_size=np.float64(f.grid.box_size),
        points=np.int64(f.grid.points),
        rep=np.str_(f.rep),
        values=f.values,
    )


def load_snapshot(path) -> Field:
    with np.load(path) as d:
        grid = Grid(float(d["box_size"]), int(d["points"]))
        return Field(grid, np.array(d["values"]), str(d["rep"]))
