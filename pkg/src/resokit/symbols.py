"""Multiplier symbols: representations, the quadratic interaction symbol q,
homogeneous symbol classes, Coifman-Meyer norms and separable approximation.

A symbol is a function of one frequency vector per slot (2 or 3 slots, each in
R^2).  Three representations are supported: closed form (a callable on
continuum frequencies), sampled (a lattice tensor in the input variables
(eta, xi-eta), arity 2), and separable (a finite sum of single-variable
multiplier factors, which is what makes FFT-fast application possible).
Class metadata records claimed membership in the homogeneous two-regime
classes, with ``dilation_time`` set for the time-dilated variant that
vanishes at frequencies below ~1/sqrt(t).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bumps import ramp, ramp_prime
from .grid import ConfigurationError, Grid


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True)
class Symbol:
    """Closed-form multiplier of 2 or 3 planar frequency arguments.

    ``fn`` receives one ``(..., 2)`` array per slot and must broadcast.
    ``partial_fns``, when present, hold analytic first partials with respect
    to the ``2 * arity`` scalar components (used by the calculus-rule checks).
    """

    arity: int
    fn: Callable = field(repr=False)
    name: str = ""
    order_low: Optional[int] = None
    order_high: Optional[int] = None
    dilation_time: Optional[float] = None
    partial_fns: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.arity not in (2, 3):
            raise ConfigurationError(f"arity must be 2 or 3, got {self.arity}")

    def eval(self, *args: np.ndarray) -> np.ndarray:
        if len(args) != self.arity:
            raise ConfigurationError(f"{self.name or 'symbol'} takes {self.arity} arguments")
        return self.fn(*args)

    def partial(self, component: int) -> "Symbol":
        """Analytic partial in scalar component ``component`` (0..2*arity-1)."""
        if self.partial_fns is None:
            raise ConfigurationError(f"{self.name or 'symbol'} has no analytic partials")
        kl = None if self.order_low is None else self.order_low - 1
        kh = None if self.order_high is None else self.order_high - 1
        return Symbol(self.arity, self.partial_fns[component],
                      name=f"d{component}_{self.name}", order_low=kl, order_high=kh,
                      dilation_time=self.dilation_time)


def constant_symbol(arity: int, value: complex = 1.0) -> Symbol:
    def fn(*args):
        shape = np.broadcast_shapes(*[a.shape[:-1] for a in args])
        return np.full(shape, value, dtype=complex)
    return Symbol(arity, fn, name=f"const({value})", order_low=0, order_high=0)


def product(a: Symbol, b: Symbol) -> Symbol:
    if a.arity != b.arity:
        raise ConfigurationError("cannot multiply symbols of different arity")
    kl = None if (a.order_low is None or b.order_low is None) else a.order_low + b.order_low
    kh = None if (a.order_high is None or b.order_high is None) else a.order_high + b.order_high
    t = a.dilation_time if a.dilation_time is not None else b.dilation_time
    return Symbol(a.arity, lambda *args: a.fn(*args) * b.fn(*args),
                  name=f"{a.name}*{b.name}", order_low=kl, order_high=kh, dilation_time=t)


def dilate(m: Symbol, t: float) -> Symbol:
    """m(t * .) in every slot (the plain dilation used by the scaled CM checks)."""
    return Symbol(m.arity, lambda *args: m.fn(*[t * a for a in args]),
                  name=f"{m.name}@{t}", order_low=m.order_low, order_high=m.order_high)


def grid_index(grid: Grid, freqs: np.ndarray) -> np.ndarray:
    """Flat lattice index of continuum frequencies (must lie on the lattice)."""
    n = grid.points
    k = np.rint(freqs / grid.dxi).astype(np.int64)
    if not np.allclose(k * grid.dxi, freqs, atol=1e-9 * grid.dxi):
        raise ConfigurationError("frequencies do not lie on the dual lattice")
    k = np.mod(k, n)
    return k[..., 0] * n + k[..., 1]


@dataclass(frozen=True)
class SampledSymbol:
    """Arity-2 symbol tabulated on the lattice in input variables (eta, xi-eta)."""

    grid: Grid
    table: np.ndarray = field(repr=False)  # (N^2, N^2), [eta index, diff index]
    name: str = ""

    @classmethod
    def from_symbol(cls, m: Symbol, grid: Grid, name: str = "") -> "SampledSymbol":
        if m.arity != 2:
            raise ConfigurationError("only arity-2 symbols can be sampled by default")
        u = grid.xi_flat()
        xi = u[:, None, :] + u[None, :, :]  # eta + (xi - eta)
        eta = np.broadcast_to(u[:, None, :], xi.shape)
        table = np.asarray(m.eval(xi, eta), dtype=complex)
        bad = ~np.isfinite(table)
        if bad.any():
            # by convention only the origin cell may be singular; zero it
            table = np.where(bad, 0.0, table)
        return cls(grid=grid, table=table, name=name or m.name)

    @property
    def arity(self) -> int:
        return 2

    def eval(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        b = grid_index(self.grid, eta)
        c = grid_index(self.grid, xi - eta)
        return self.table[b, c]


@dataclass(frozen=True)
class SeparableSymbol:
    """Finite sum of separated factors a_k(xi) * b_k(eta) * c_k(xi - eta).

    Factors are stored sampled on the dual lattice (flat length N^2 vectors);
    ``out_factors`` may be None, meaning a_k == 1.
    """

    grid: Grid
    eta_factors: np.ndarray = field(repr=False)   # (K, N^2)
    diff_factors: np.ndarray = field(repr=False)  # (K, N^2)
    out_factors: Optional[np.ndarray] = field(default=None, repr=False)
    approx_error: float = 0.0
    name: str = ""

    @property
    def arity(self) -> int:
        return 2

    @property
    def rank(self) -> int:
        return self.eta_factors.shape[0]

    def eval(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        b = grid_index(self.grid, eta)
        c = grid_index(self.grid, xi - eta)
        out = np.zeros(np.broadcast_shapes(b.shape, c.shape), dtype=complex)
        a = grid_index(self.grid, xi) if self.out_factors is not None else None
        for k in range(self.rank):
            term = self.eta_factors[k][b] * self.diff_factors[k][c]
            if self.out_factors is not None:
                term = term * self.out_factors[k][a]
            out += term
        return out


@dataclass(frozen=True)
class FlagSymbol:
    """Trilinear symbol factored as m3(xi,eta,sigma) * m1(eta,xi) * m2(eta,sigma).

    ``m1`` and ``m2`` are arity-2 symbols whose own first argument is eta.
    ``m3`` may be None (identically 1), which is the case for every flag
    kernel arising from the normal form; the nested application path requires
    m3 to be independent of sigma.
    """

    m1: Symbol
    m2: Symbol
    m3: Optional[Symbol] = None
    name: str = ""

    @property
    def arity(self) -> int:
        return 3

    def eval(self, xi: np.ndarray, eta: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        out = self.m1.eval(eta, xi) * self.m2.eval(eta, sigma)
        if self.m3 is not None:
            out = out * self.m3.eval(xi, eta, sigma)
        return out


# ---------------------------------------------------------------------------
# the quadratic interaction symbol


def build_q(ell: Sequence[float] = (0.25, 0.0, 0.25, 0.0),
            blend: str = "radial") -> Symbol:
    """Interaction symbol: the linear functional ell(xi, eta) at low joint
    frequency, 1 once |(xi, eta)| >= 2, smooth in between.

    ``ell`` holds the four coefficients (xi1, xi2, eta1, eta2); the default
    (xi1 + eta1)/4 keeps |q| <= 1 through the blend region.  Two blends share
    the contract (exactly linear on the unit ball, exactly 1 outside radius
    2): "radial" interpolates along the joint radius, "separable" uses the
    product of per-variable bumps 1 - P(xi) R(eta) (1 - ell), each bump
    supported in |.| < sqrt(2), which makes the symbol an exact rank-<=6
    separated sum and hence FFT-fast on large grids.
    """
    c = np.asarray(ell, dtype=float)
    if c.shape != (4,) or not np.any(c):
        raise ConfigurationError("ell must be a nonzero 4-vector of coefficients")

    def lin(xi, eta):
        return (c[0] * xi[..., 0] + c[1] * xi[..., 1]
                + c[2] * eta[..., 0] + c[3] * eta[..., 1])

    if blend == "radial":
        def fn(xi, eta):
            r = np.sqrt(xi[..., 0] ** 2 + xi[..., 1] ** 2
                        + eta[..., 0] ** 2 + eta[..., 1] ** 2)
            s = ramp(r, 1.0, 2.0)
            return (1.0 - s) * lin(xi, eta) + s
    elif blend == "separable":
        def fn(xi, eta):
            p = 1.0 - ramp(np.linalg.norm(xi, axis=-1), 1.0, math.sqrt(2.0))
            r = 1.0 - ramp(np.linalg.norm(eta, axis=-1), 1.0, math.sqrt(2.0))
            return 1.0 - p * r * (1.0 - lin(xi, eta))
    else:
        raise ConfigurationError(f"unknown q blend {blend!r}")

    return Symbol(2, fn, name=f"q[{blend}]", order_low=1, order_high=0)


def separable_q_factors(grid: Grid, ell: Sequence[float] = (0.25, 0.0, 0.25, 0.0)
                        ) -> SeparableSymbol:
    """Exact separated-sum realization of the separable-blend q on a lattice.

    1 - P(xi) R(eta) + sum_i c_i [component_i-weighted bump factors], rank
    at most 6; no approximation error.
    """
    c = np.asarray(ell, dtype=float)
    if c.shape != (4,) or not np.any(c):
        raise ConfigurationError("ell must be a nonzero 4-vector of coefficients")
    u = grid.xi_flat()
    ones = np.ones(len(u))
    bump = 1.0 - ramp(np.linalg.norm(u, axis=-1), 1.0, math.sqrt(2.0))
    out_factors = [ones]
    eta_factors = [ones]
    terms_out, terms_eta = [-bump], [bump]
    for i, coeff in enumerate(c[:2]):
        if coeff != 0:
            terms_out.append(coeff * u[:, i] * bump)
            terms_eta.append(bump)
    for i, coeff in enumerate(c[2:]):
        if coeff != 0:
            terms_out.append(bump)
            terms_eta.append(coeff * u[:, i] * bump)
    out_factors.extend(terms_out)
    eta_factors.extend(terms_eta)
    k = len(out_factors)
    return SeparableSymbol(
        grid=grid,
        eta_factors=np.stack(eta_factors),
        diff_factors=np.ones((k, len(u))),
        out_factors=np.stack(out_factors),
        approx_error=0.0,
        name="q[separable]",
    )


# ---------------------------------------------------------------------------
# Coifman-Meyer norm by sampled finite differences

STEP_FRACTION = 1e-3  # FD step relative to the sample's distance from the origin


def _split(args_flat: np.ndarray, arity: int) -> list[np.ndarray]:
    return [args_flat[..., 2 * i:2 * i + 2] for i in range(arity)]


def _eval_at(m, pts: np.ndarray) -> np.ndarray:
    arity = m.arity
    return np.asarray(m.eval(*_split(pts, arity)), dtype=complex)


def _central_stencil(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets (in units of h) and coefficients (for 1/h^order) of the
    central difference of a given order."""
    if order == 0:
        return np.array([0.0]), np.array([1.0])
    ells = np.arange(order + 1)
    coeffs = np.array([(-1.0) ** l * math.comb(order, l) for l in ells])
    offsets = order / 2.0 - ells
    return offsets, coeffs


def _fd_derivative(m, pts: np.ndarray, multi: tuple[int, ...], h: np.ndarray) -> np.ndarray:
    """Mixed central difference of ``m`` at ``pts`` for multi-index ``multi``.

    ``h`` is a per-point step (proportional to distance from the origin).
    """
    dims = [i for i, d in enumerate(multi) if d > 0]
    if not dims:
        return _eval_at(m, pts)
    stencils = [_central_stencil(multi[i]) for i in dims]
    total = np.zeros(pts.shape[0], dtype=complex)
    for combo in itertools.product(*[range(len(s[0])) for s in stencils]):
        shift = np.zeros_like(pts)
        coeff = np.ones(pts.shape[0])
        for (i, (offs, cfs)), ci in zip(zip(dims, stencils), combo):
            shift[:, i] += offs[ci] * h
            coeff = coeff * cfs[ci]
        total += coeff * _eval_at(m, pts + shift)
    scale = h ** float(sum(multi))
    return total / scale


def multi_indices(n_vars: int, max_order: int):
    for total in range(max_order + 1):
        for combo in itertools.combinations_with_replacement(range(n_vars), total):
            multi = [0] * n_vars
            for i in combo:
                multi[i] += 1
            yield tuple(multi)


def default_cm_samples(arity: int, radii: Optional[Sequence[float]] = None,
                       n_dirs: int = 16, seed: int = 5) -> np.ndarray:
    """Sphere samples at dyadic radii; excludes the origin by construction."""
    dim = 2 * arity
    if radii is None:
        radii = [2.0**e for e in range(-5, 4)]
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_dirs, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = np.concatenate([r * dirs for r in radii], axis=0)
    return pts


@dataclass(frozen=True)
class CmNormReport:
    value: float
    max_order: int
    shell_values: tuple  # ((radius, max weighted derivative), ...) toward the origin

    @property
    def diverging(self) -> bool:
        vals = [v for _, v in self.shell_values]
        return len(vals) >= 3 and vals[-1] > 4.0 * vals[0]


def _weighted_derivatives_max(m, pts: np.ndarray, max_order: int) -> float:
    arity = m.arity
    dim = 2 * arity
    slot_norms = sum(
        np.linalg.norm(pts[:, 2 * i:2 * i + 2], axis=1) for i in range(arity)
    )
    h = STEP_FRACTION * np.linalg.norm(pts, axis=1)
    best = 0.0
    for multi in multi_indices(dim, max_order):
        tot = sum(multi)
        vals = np.abs(_fd_derivative(m, pts, multi, h))
        best = max(best, float(np.max(slot_norms**tot * vals)))
    return best


def cm_norm(m, max_order: int = 2, samples: Optional[np.ndarray] = None,
            return_report: bool = False):
    """sup over samples and |alpha| <= max_order of
    (|xi_1| + ... + |xi_n|)^|alpha| |d^alpha m|, by central finite differences.

    Divergence is not an error: it shows up as growth in the shell refinement
    report, which is returned when ``return_report`` is set.
    """
    if samples is None:
        samples = default_cm_samples(m.arity)
    samples = np.asarray(samples, dtype=float)
    if np.any(np.linalg.norm(samples, axis=1) == 0.0):
        raise ConfigurationError("samples must exclude the origin")
    value = _weighted_derivatives_max(m, samples, max_order)
    if not return_report:
        return value
    rng = np.random.default_rng(11)
    dirs = rng.standard_normal((8, samples.shape[1]))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    shells = []
    for e in range(-4, -13, -2):
        r = 2.0**e
        shells.append((r, _weighted_derivatives_max(m, r * dirs, max_order)))
    return CmNormReport(value=value, max_order=max_order, shell_values=tuple(shells))


def flag_norm(flag: FlagSymbol, max_order: int = 2) -> float:
    """Product of the factors' CM norms (the natural size of a flag symbol)."""
    parts = [flag.m1, flag.m2] + ([flag.m3] if flag.m3 is not None else [])
    out = 1.0
    for p in parts:
        out *= cm_norm(p, max_order=max_order)
    return out


# ---------------------------------------------------------------------------
# class membership checks


@dataclass(frozen=True)
class ClassReport:
    order_low: int
    order_high: int
    dilation_time: Optional[float]
    max_order: int
    const_low: float
    const_high: float
    vanish_max: Optional[float]
    vanish_tol: float = 1e-10

    @property
    def passed(self) -> bool:
        ok = np.isfinite(self.const_low) and np.isfinite(self.const_high)
        if self.vanish_max is not None:
            ok = ok and self.vanish_max <= self.vanish_tol
        return bool(ok)


def check_class(m, k: int, kprime: int, t: Optional[float] = None,
                max_order: int = 2, n_dirs: int = 12, seed: int = 9) -> ClassReport:
    """Verify two-regime homogeneous bounds by sampled finite differences.

    Reports the smallest constants C with |d^a m| <= C r^(k-|a|) on the low
    regime (1/sqrt(t)-ish <= r <= 2) and <= C r^(k'-|a|) for r >= 2; for
    dilated classes additionally reports the max of |m| below ~0.45/sqrt(t).
    Failures are reported through the constants, never raised.
    """
    dim = 2 * m.arity
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_dirs, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    # sample down into the dilation transition zone; below it the symbol
    # vanishes and the bounds hold trivially (checked separately)
    r_floor = 0.6 / math.sqrt(t) if t is not None else 0.05
    low_radii = np.geomspace(min(r_floor, 1.9), 1.9, 6)
    high_radii = np.geomspace(2.1, 16.0, 6)

    def regime_constant(radii, order_exp):
        h_rel = STEP_FRACTION
        worst = 0.0
        for r in radii:
            pts = r * dirs
            h = h_rel * np.full(pts.shape[0], r)
            for multi in multi_indices(dim, max_order):
                tot = sum(multi)
                vals = np.abs(_fd_derivative(m, pts, multi, h))
                bound = r ** float(order_exp - tot)
                worst = max(worst, float(np.max(vals)) / bound)
        return worst

    c_low = regime_constant(low_radii, k)
    c_high = regime_constant(high_radii, kprime)

    vanish = None
    if t is not None:
        r_v = 0.45 / math.sqrt(t)
        pts = np.concatenate([rr * dirs for rr in np.geomspace(0.1 * r_v, r_v, 4)])
        vanish = float(np.max(np.abs(_eval_at(m, pts))))

    return ClassReport(order_low=k, order_high=kprime, dilation_time=t,
                       max_order=max_order, const_low=c_low, const_high=c_high,
                       vanish_max=vanish)


# ---------------------------------------------------------------------------
# exemplar families (radial, with analytic first partials)


def _rho(r: np.ndarray, k: int, kprime: int) -> np.ndarray:
    safe = np.where(r > 0, r, 1.0)
    b = ramp(r, 1.5, 2.0)
    return np.where(r > 0, safe**k * (1 - b) + 2.0 ** (k - kprime) * safe**kprime * b, 0.0 if k > 0 else 1.0)


def _rho_prime(r: np.ndarray, k: int, kprime: int) -> np.ndarray:
    safe = np.where(r > 0, r, 1.0)
    b = ramp(r, 1.5, 2.0)
    bp = ramp_prime(r, 1.5, 2.0)
    out = (k * safe ** (k - 1) * (1 - b) - safe**k * bp
           + 2.0 ** (k - kprime) * (kprime * safe ** (kprime - 1) * b + safe**kprime * bp))
    return np.where(r > 0, out, 0.0)


def _radial(args) -> np.ndarray:
    sq = sum(a[..., 0] ** 2 + a[..., 1] ** 2 for a in args)
    return np.sqrt(sq)


def homogeneous_exemplar(k: int, kprime: int, arity: int = 2) -> Symbol:
    """Radial member of the two-regime class: r^k at low, ~r^k' at high frequency."""

    def fn(*args):
        return _rho(_radial(args), k, kprime) + 0j

    def make_partial(i):
        def pfn(*args):
            r = _radial(args)
            comp = args[i // 2][..., i % 2]
            safe = np.where(r > 0, r, 1.0)
            return _rho_prime(r, k, kprime) * comp / safe + 0j
        return pfn

    partials = tuple(make_partial(i) for i in range(2 * arity))
    return Symbol(arity, fn, name=f"M[{k},{kprime}]", order_low=k, order_high=kprime,
                  partial_fns=partials)


def dilated_exemplar(k: int, kprime: int, t: float, arity: int = 2) -> Symbol:
    """Radial member of the dilated class: vanishes for r <= 1/(2 sqrt(t)),
    behaves like r^k on 1/sqrt(t) <= r <= 2 and like r^k' beyond."""
    st = math.sqrt(t)

    def fn(*args):
        r = _radial(args)
        return ramp(st * r, 0.5, 1.0) * _rho(r, k, kprime) + 0j

    def make_partial(i):
        def pfn(*args):
            r = _radial(args)
            comp = args[i // 2][..., i % 2]
            safe = np.where(r > 0, r, 1.0)
            z = ramp(st * r, 0.5, 1.0)
            zp = st * ramp_prime(st * r, 0.5, 1.0)
            dr = zp * _rho(r, k, kprime) + z * _rho_prime(r, k, kprime)
            return dr * comp / safe + 0j
        return pfn

    partials = tuple(make_partial(i) for i in range(2 * arity))
    return Symbol(arity, fn, name=f"m_t[{k},{kprime}]@{t}", order_low=k,
                  order_high=kprime, dilation_time=t, partial_fns=partials)


def exemplar_time_derivative(k: int, kprime: int, t: float, arity: int = 2) -> Symbol:
    """Closed-form d/dt of the dilated exemplar at time t."""
    st = math.sqrt(t)

    def fn(*args):
        r = _radial(args)
        return (0.5 / st) * r * ramp_prime(st * r, 0.5, 1.0) * _rho(r, k, kprime) + 0j

    return Symbol(arity, fn, name=f"dt m_t[{k},{kprime}]@{t}", order_low=k,
                  order_high=kprime, dilation_time=t)


# ---------------------------------------------------------------------------
# separable approximation


def separable_approx(m, grid: Grid, rank: int,
                     validation_samples: int = 4096, seed: int = 3) -> SeparableSymbol:
    """Rank-``rank`` factorization of an arity-2 symbol via SVD of its lattice
    tensor in the input variables (eta, xi - eta).

    The reported error is the max absolute reconstruction error on a random
    validation subset of lattice pairs, relative to the tensor's max modulus.
    Requesting more than the numerical rank returns the exact factorization.
    """
    table = m.table if isinstance(m, SampledSymbol) else SampledSymbol.from_symbol(m, grid).table
    u_mat, s, vh = np.linalg.svd(table, full_matrices=False)
    num_rank = int(np.sum(s > s[0] * 1e-14)) if s[0] > 0 else 0
    k_eff = min(rank, num_rank) if num_rank else 0
    sq = np.sqrt(s[:k_eff])
    eta_factors = (u_mat[:, :k_eff] * sq[None, :]).T.copy()
    diff_factors = (vh[:k_eff, :] * sq[:, None]).copy()

    rng = np.random.default_rng(seed)
    nn = table.shape[0]
    ii = rng.integers(0, nn, size=validation_samples)
    jj = rng.integers(0, nn, size=validation_samples)
    recon = np.einsum("ks,ks->s", eta_factors[:, ii], diff_factors[:, jj]) if k_eff else np.zeros(len(ii))
    scale = np.max(np.abs(table))
    err = float(np.max(np.abs(recon - table[ii, jj])) / scale) if scale > 0 else 0.0
    return SeparableSymbol(grid=grid, eta_factors=eta_factors, diff_factors=diff_factors,
                           approx_error=err, name=f"sep[{getattr(m, 'name', '')}:{k_eff}]")


# ---------------------------------------------------------------------------
# manifest


def symbol_manifest(m) -> dict:
    """Serializable description: name, arity, representation, class tags,
    rank and error for separable forms."""
    entry = {
        "name": getattr(m, "name", ""),
        "arity": m.arity,
    }
    if isinstance(m, SeparableSymbol):
        entry.update(representation="separable", rank=m.rank, error=m.approx_error)
    elif isinstance(m, SampledSymbol):
        entry.update(representation="sampled", points=m.grid.points)
    elif isinstance(m, FlagSymbol):
        entry.update(representation="flag",
                     factors=[symbol_manifest(p) for p in (m.m1, m.m2) if p is not None])
    else:
        entry.update(representation="closed-form",
                     order_low=m.order_low, order_high=m.order_high,
                     dilation_time=m.dilation_time)
    return entry
