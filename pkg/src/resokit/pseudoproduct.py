"""Bilinear and trilinear pseudo-product operators.

Discrete convention, fixed once: with unitary-DFT coefficients ``O`` the
bilinear operator is

    out_hat[a] = (1/N) * sum_b  m(u_b + u_c, u_b) * O_f[b] * O_g[c],
    c = wrap(a - b),

so the symbol is evaluated at the true interaction frequencies of the input
pair and ``m == 1`` reproduces the pointwise product exactly (all continuum
normalization constants are absorbed here once).  Trilinear, with slots
(sigma, eta - sigma, xi - eta):

    out_hat[a] = (1/N^2) * sum_{b,s} m(u_s + u_e + u_d, u_s + u_e, u_s)
                 * O_1[s] * O_2[e] * O_3[d],
    e = wrap(b - s), d = wrap(a - b).

Three application paths: direct quadrature (the defining oracle), separable
sum (FFT-fast multiplier-then-product), and factored phase (for symbols
``m * exp(i s phi)`` with a catalog phase the oscillation moves onto the
inputs/output as free propagators, leaving ``m``).  Flag symbols with a
trivial trivariate part apply as two nested bilinear passes.  All paths agree
on alias-free data (spectra truncated so input frequency sums stay in band);
the direct path is the defining quadrature everywhere.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .grid import ConfigurationError, FREQUENCY, Field, Grid, propagate
from .lp import DyadicPartition
from .resonance import PhaseSpec, phase_eval
from .symbols import FlagSymbol, SampledSymbol, SeparableSymbol, Symbol

DIRECT_BILINEAR_LIMIT = 64
DIRECT_TRILINEAR_LIMIT = 16


@dataclass(frozen=True)
class PhasedSymbol:
    """A symbol of the form base * exp(i s phi); ``base = None`` means 1."""

    phase: PhaseSpec
    s: float
    base: Optional[Union[Symbol, SampledSymbol, SeparableSymbol, FlagSymbol]] = None

    @property
    def arity(self) -> int:
        return self.phase.arity

    def eval(self, *args) -> np.ndarray:
        osc = np.exp(1j * self.s * phase_eval(self.phase, *args))
        if self.base is None:
            return osc
        return self.base.eval(*args) * osc


@functools.lru_cache(maxsize=8)
def _wrap_table(n: int) -> np.ndarray:
    """W[a, b] = flat index of the lattice difference a - b (mod N per axis)."""
    idx = np.arange(n * n)
    a1, a2 = np.divmod(idx, n)
    d1 = np.mod(a1[:, None] - a1[None, :], n)
    d2 = np.mod(a2[:, None] - a2[None, :], n)
    return (d1 * n + d2).astype(np.int32)


@functools.lru_cache(maxsize=8)
def alias_free_mask(n: int) -> np.ndarray:
    """K[a, b] = 1 when the input pair (u_b, u_{wrap(a-b)}) sums inside the
    resolved band, 0 when the product would alias.

    Zeroing kernels on aliased pairs is frequency-truncation dealiasing; it
    also makes the factored-phase propagator bookkeeping exact pair by pair,
    which the normal-form identity relies on.
    """
    w = _wrap_table(n)
    idx = np.arange(n * n)
    i1, i2 = np.divmod(idx, n)
    s1 = ((i1 + n // 2) % n) - n // 2  # signed integer frequency per axis
    s2 = ((i2 + n // 2) % n) - n // 2
    sum1 = s1[None, :] + s1[w]
    sum2 = s2[None, :] + s2[w]
    ok = ((sum1 >= -n // 2) & (sum1 <= n // 2 - 1)
          & (sum2 >= -n // 2) & (sum2 <= n // 2 - 1))
    return ok.astype(np.float64)


def _check_guard(n: int, limit: int, allow_large: bool, kind: str) -> None:
    if n > limit and not allow_large:
        raise ConfigurationError(
            f"direct {kind} quadrature on a {n}^2 grid exceeds the cost guard "
            f"(N <= {limit}); pass allow_large=True to override")


class BilinearOperator:
    """Precomputed direct-quadrature kernel of an arity-2 symbol on a grid.

    ``dealias=True`` zeroes the kernel on aliased input pairs (truncation
    dealiasing); the product anchor m == 1 then holds on the alias-free band
    only, which is the convention the evolution machinery uses.
    """

    def __init__(self, m, grid: Grid, allow_large: bool = False,
                 dealias: bool = False):
        _check_guard(grid.points, DIRECT_BILINEAR_LIMIT, allow_large, "bilinear")
        if m.arity != 2:
            raise ConfigurationError("bilinear application needs an arity-2 symbol")
        self.grid = grid
        n2 = grid.points**2
        w = _wrap_table(grid.points)
        u = grid.xi_flat()
        if isinstance(m, (SampledSymbol, SeparableSymbol)) and m.grid != grid:
            raise ConfigurationError("lattice symbol lives on a different grid")
        # gathered kernel: G[a, b] = m(u_b + u_{wrap(a-b)}, u_b), built in row
        # chunks to keep eval transients small on large grids
        kernel = np.empty((n2, n2), dtype=complex)
        cols = np.arange(n2)[None, :]
        chunk = max(1, min(n2, (1 << 22) // n2))
        for lo in range(0, n2, chunk):
            hi = min(lo + chunk, n2)
            if isinstance(m, SampledSymbol):
                kernel[lo:hi] = m.table[cols, w[lo:hi]]
            else:
                diff = u[w[lo:hi]]                       # (chunk, n2, 2)
                eta = np.broadcast_to(u[None, :, :], diff.shape)
                kernel[lo:hi] = np.asarray(m.eval(eta + diff, eta), dtype=complex)
        if dealias:
            kernel *= alias_free_mask(grid.points)
        self.kernel = kernel
        self.wrap = w

    def apply(self, f: Field, g: Field) -> Field:
        of = f.to_frequency().values.ravel()
        og = g.to_frequency().values.ravel()
        out = (self.kernel * og[self.wrap]) @ of / f.grid.points
        n = f.grid.points
        return Field(f.grid, out.reshape(n, n), FREQUENCY).to_physical()


class TrilinearOperator:
    """Precomputed direct-quadrature kernel of an arity-3 symbol on a grid."""

    def __init__(self, m, grid: Grid, allow_large: bool = False):
        _check_guard(grid.points, DIRECT_TRILINEAR_LIMIT, allow_large, "trilinear")
        if m.arity != 3:
            raise ConfigurationError("trilinear application needs an arity-3 symbol")
        self.grid = grid
        n2 = grid.points**2
        w = _wrap_table(grid.points)
        u = grid.xi_flat()
        # eta_true[b, s] = u_s + u_{wrap(b - s)}
        eta_true = u[w] + u[None, :, :]
        sigma = np.broadcast_to(u[None, :, :], eta_true.shape)
        kernel = np.empty((n2, n2, n2), dtype=complex)  # [a, b, s]
        for a in range(n2):
            xi = eta_true + u[w[a]][:, None, :]
            kernel[a] = np.asarray(m.eval(xi, eta_true, sigma), dtype=complex)
        self.kernel = kernel
        self.wrap = w

    def apply(self, f1: Field, f2: Field, f3: Field) -> Field:
        n = self.grid.points
        o1 = f1.to_frequency().values.ravel()
        o2 = f2.to_frequency().values.ravel()
        o3 = f3.to_frequency().values.ravel()
        w = self.wrap
        pair = o1[None, :] * o2[w]               # [b, s] -> O1[s] O2[wrap(b-s)]
        q = np.einsum("abs,bs->ab", self.kernel, pair, optimize=True)
        out = np.einsum("ab,ab->a", q, o3[w], optimize=True) / self.grid.points**2
        return Field(self.grid, out.reshape(n, n), FREQUENCY).to_physical()


def _separable_apply(m: SeparableSymbol, f: Field, g: Field) -> Field:
    grid = f.grid
    n = grid.points
    fh = f.to_frequency().values
    gh = g.to_frequency().values
    out = np.zeros((n, n), dtype=complex)
    for k in range(m.rank):
        bf = np.fft.ifft2(fh * m.eta_factors[k].reshape(n, n), norm="ortho")
        cg = np.fft.ifft2(gh * m.diff_factors[k].reshape(n, n), norm="ortho")
        term = np.fft.fft2(bf * cg, norm="ortho")
        if m.out_factors is not None:
            term = term * m.out_factors[k].reshape(n, n)
        out += term
    return Field(grid, out, FREQUENCY).to_physical()


def _factored_bilinear(m: PhasedSymbol, f: Field, g: Field, inner_method: str,
                       allow_large: bool) -> Field:
    s = m.s
    s1, s2 = m.phase.signs
    pf = propagate(f, -s * s1)
    pg = propagate(g, -s * s2)
    if m.base is None:
        prod = Field(f.grid, pf.to_physical().values * pg.to_physical().values)
    else:
        prod = apply_bilinear(m.base, pf, pg, method=inner_method, allow_large=allow_large)
    return propagate(prod, s)


def apply_bilinear(m, f: Field, g: Field, method: str = "direct",
                   allow_large: bool = False) -> Field:
    """Apply an arity-2 pseudo-product; see the module docstring for paths."""
    if f.grid != g.grid:
        raise ConfigurationError("fields live on different grids")
    if method == "direct":
        return BilinearOperator(m, f.grid, allow_large=allow_large).apply(f, g)
    if method == "separable":
        if isinstance(m, PhasedSymbol):
            if not isinstance(m.base, (SeparableSymbol, type(None))):
                raise ConfigurationError("separable method needs a separable base symbol")
            return _factored_bilinear(m, f, g, "separable" if m.base is not None else "direct",
                                      allow_large)
        if not isinstance(m, SeparableSymbol):
            raise ConfigurationError("separable method requires a separable symbol")
        return _separable_apply(m, f, g)
    if method == "factored":
        if not isinstance(m, PhasedSymbol):
            raise ConfigurationError("factored method requires a phased symbol")
        return _factored_bilinear(m, f, g, "direct", allow_large)
    raise ConfigurationError(f"unknown application method {method!r}")


def _nested_flag(m: FlagSymbol, f1: Field, f2: Field, f3: Field,
                 allow_large: bool) -> Field:
    if m.m3 is not None:
        raise ConfigurationError(
            "nested flag application needs a trivial trivariate part")
    inner = apply_bilinear(m.m2, f1, f2, method="direct", allow_large=allow_large)
    outer = Symbol(2, lambda xi, eta: m.m1.fn(eta, xi), name=f"outer[{m.name}]")
    return apply_bilinear(outer, inner, f3, method="direct", allow_large=allow_large)


def _factored_trilinear(m: PhasedSymbol, f1: Field, f2: Field, f3: Field,
                        method: str, allow_large: bool) -> Field:
    s = m.s
    e1, e2, e3 = m.phase.signs
    p1 = propagate(f1, -s * e3)
    p2 = propagate(f2, -s * e2)
    p3 = propagate(f3, -s * e1)
    if m.base is None:
        prod = Field(f1.grid, p1.to_physical().values * p2.to_physical().values
                     * p3.to_physical().values)
    else:
        prod = apply_trilinear(m.base, p1, p2, p3, method=method, allow_large=allow_large)
    return propagate(prod, s)


def apply_trilinear(m, f1: Field, f2: Field, f3: Field, method: str = "direct",
                    allow_large: bool = False) -> Field:
    """Apply an arity-3 pseudo-product (slots sigma, eta-sigma, xi-eta).

    ``method`` is "direct", "nested" (flag symbols with trivial trivariate
    part, applied as bilinear-in-bilinear; bilinear cost guards apply), or
    "factored" (phased symbols; the remaining base symbol goes through
    "nested" when it is a flag, else "direct").
    """
    if not (f1.grid == f2.grid == f3.grid):
        raise ConfigurationError("fields live on different grids")
    if method == "direct":
        return TrilinearOperator(m, f1.grid, allow_large=allow_large).apply(f1, f2, f3)
    if method == "nested":
        if isinstance(m, PhasedSymbol):
            return _factored_trilinear(m, f1, f2, f3, "nested", allow_large)
        if not isinstance(m, FlagSymbol):
            raise ConfigurationError("nested method requires a flag symbol")
        return _nested_flag(m, f1, f2, f3, allow_large)
    if method == "factored":
        if not isinstance(m, PhasedSymbol):
            raise ConfigurationError("factored method requires a phased symbol")
        inner = "nested" if isinstance(m.base, FlagSymbol) else "direct"
        return _factored_trilinear(m, f1, f2, f3, inner, allow_large)
    raise ConfigurationError(f"unknown application method {method!r}")


# ---------------------------------------------------------------------------
# paraproduct decomposition


def _block_multipliers(grid: Grid) -> list[np.ndarray]:
    """Inhomogeneous block list: the low block below j_min, then each band.

    The blocks sum to 1 exactly on the lattice, which is what makes the
    three-piece reconstruction below exact.
    """
    part = DyadicPartition.for_grid(grid)
    mults = [part.low_multiplier(part.j_min)]
    mults.extend(part.band_multiplier(j) for j in part.bands)
    return mults


def paraproduct_pieces(f: Field, g: Field) -> tuple[Field, Field, Field]:
    """Split f*g into (high-low, low-high, high-high) by relative dyadic scale.

    Index pairs (j, k) over the inhomogeneous block list are classified as
    j >= k + 2 (high-low), k >= j + 2 (low-high) and |j - k| <= 1
    (high-high); every pair lands in exactly one piece, so the three fields
    sum to the pointwise product to machine precision.
    """
    if f.grid != g.grid:
        raise ConfigurationError("fields live on different grids")
    grid = f.grid
    mults = _block_multipliers(grid)
    fh = f.to_frequency().values
    gh = g.to_frequency().values
    f_blocks = [np.fft.ifft2(fh * m, norm="ortho") for m in mults]
    g_blocks = [np.fft.ifft2(gh * m, norm="ortho") for m in mults]

    def cumsum_below(blocks, j):
        # sum of blocks 0..j-2 (zero when j < 2)
        acc = np.zeros_like(blocks[0])
        for b in blocks[:max(j - 1, 0)]:
            acc = acc + b
        return acc

    n = grid.points
    hl = np.zeros((n, n), dtype=complex)
    lh = np.zeros((n, n), dtype=complex)
    hh = np.zeros((n, n), dtype=complex)
    g_low = np.zeros((n, n), dtype=complex)
    f_low = np.zeros((n, n), dtype=complex)
    for j in range(len(mults)):
        if j >= 2:
            g_low = g_low + g_blocks[j - 2]
            f_low = f_low + f_blocks[j - 2]
        hl += f_blocks[j] * g_low
        lh += f_low * g_blocks[j]
        neighbors = sum(g_blocks[k] for k in range(max(j - 1, 0), min(j + 2, len(mults))))
        hh += f_blocks[j] * neighbors
    return (Field(grid, hl), Field(grid, lh), Field(grid, hh))


# ---------------------------------------------------------------------------
# model operators and the gapped flag operator


def _band_fields(f: Field, js: range) -> dict[int, np.ndarray]:
    part = DyadicPartition.for_grid(f.grid)
    fh = f.to_frequency().values
    return {j: np.fft.ifft2(fh * part.band_multiplier(j), norm="ortho") for j in js}


def model_operator(variant: int, f1: Field, f2: Field, f3: Field, gap: int = 0) -> Field:
    """One of the three dyadic model operators at band offset ``gap`` >= 0:

    1) sum_j P_j(P_(j+gap) f1 * P_(j+gap) f2) * P_(<j-1) f3
    2) sum_j P_(<j-1)(P_(j+gap) f1 * P_(j+gap) f2) * P_j f3
    3) sum_j P_j(P_(j+gap) f1 * P_(j+gap) f2) * P_j f3
    """
    if variant not in (1, 2, 3):
        raise ConfigurationError(f"variant must be 1, 2 or 3, got {variant}")
    if gap < 0:
        raise ConfigurationError("gap must be >= 0")
    grid = f1.grid
    part = DyadicPartition.for_grid(grid)
    n = grid.points
    out = np.zeros((n, n), dtype=complex)
    f3h = f3.to_frequency().values
    for j in part.bands:
        if j + gap > part.j_max:
            break
        b1 = np.fft.ifft2(f1.to_frequency().values * part.band_multiplier(j + gap), norm="ortho")
        b2 = np.fft.ifft2(f2.to_frequency().values * part.band_multiplier(j + gap), norm="ortho")
        prod_h = np.fft.fft2(b1 * b2, norm="ortho")
        if variant in (1, 3):
            mid = np.fft.ifft2(prod_h * part.band_multiplier(j), norm="ortho")
        else:
            mid = np.fft.ifft2(prod_h * part.low_multiplier(j - 1), norm="ortho")
        if variant == 1:
            third = np.fft.ifft2(f3h * part.low_multiplier(j - 1), norm="ortho")
        else:
            third = np.fft.ifft2(f3h * part.band_multiplier(j), norm="ortho")
        out += mid * third
    return Field(grid, out)


def summed_model_operator(variant: int, f1: Field, f2: Field, f3: Field,
                          min_gap: int = 0, weight_power: int = 1) -> Field:
    """Geometrically weighted sum over gaps >= min_gap of the model operator
    (the separated-scale form the single-gap operators are summed into)."""
    grid = f1.grid
    part = DyadicPartition.for_grid(grid)
    n = grid.points
    out = np.zeros((n, n), dtype=complex)
    for gap in range(min_gap, part.j_max - part.j_min + 1):
        term = model_operator(variant, f1, f2, f3, gap=gap)
        out += 2.0 ** (-weight_power * gap) * term.values
    return Field(grid, out)


def gapped_flag_operator(f1: Field, f2: Field, f3: Field, gap: int = 3) -> Field:
    """sum_k P_(<k-gap)(P_k f1 * P_k f2) * P_(<k-gap) f3 over resolvable bands.

    The gap plays the role of a large fixed scale separation; desk grids host
    only ~log2(N) dyadic scales, so it defaults to 3.
    """
    if gap < 2:
        raise ConfigurationError("gap must be >= 2 to separate the scales")
    grid = f1.grid
    part = DyadicPartition.for_grid(grid)
    n = grid.points
    out = np.zeros((n, n), dtype=complex)
    f1h = f1.to_frequency().values
    f2h = f2.to_frequency().values
    f3h = f3.to_frequency().values
    for k in part.bands:
        b1 = np.fft.ifft2(f1h * part.band_multiplier(k), norm="ortho")
        b2 = np.fft.ifft2(f2h * part.band_multiplier(k), norm="ortho")
        prod_h = np.fft.fft2(b1 * b2, norm="ortho")
        low = part.low_multiplier(k - gap)
        left = np.fft.ifft2(prod_h * low, norm="ortho")
        right = np.fft.ifft2(f3h * low, norm="ortho")
        out += left * right
    return Field(grid, out)


def gapped_flag_symbol(grid: Grid, gap: int = 3) -> Symbol:
    """The trilinear symbol realized by :func:`gapped_flag_operator` on a
    given grid (sum over the same resolvable bands), for oracle comparison."""
    from .lp import low_cut, theta

    part = DyadicPartition.for_grid(grid)
    ks = list(part.bands)

    def fn(xi, eta, sigma):
        r_eta = np.linalg.norm(eta, axis=-1)
        r_sig = np.linalg.norm(sigma, axis=-1)
        r_mid = np.linalg.norm(eta - sigma, axis=-1)
        r_out = np.linalg.norm(xi - eta, axis=-1)
        total = np.zeros(r_eta.shape)
        for k in ks:
            total = total + (low_cut(r_eta / 2.0 ** (k - gap)) * theta(r_sig / 2.0**k)
                             * theta(r_mid / 2.0**k) * low_cut(r_out / 2.0 ** (k - gap)))
        return total + 0j

    return Symbol(3, fn, name=f"gapped_flag[{gap}]")
