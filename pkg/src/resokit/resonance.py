"""Interaction phases, resonant-set extraction, and the R/S/T cutoff partitions.

Every phase in play is a pure quadratic form on the stacked frequency vector
``p = (xi, eta[, sigma])``:

    quadratic:  phi = -|xi|^2 + s1 |eta|^2 + s2 |xi - eta|^2
    cubic:      phi = -|xi|^2 + e1 |xi - eta|^2 + e2 |eta - sigma|^2 + e3 |sigma|^2

Space resonance is the kernel of the (eta[, sigma])-gradient, a fixed linear
map; time resonance is the zero set of the form; the space-time resonant set
is their intersection.  Being exact quadratics, everything needed by the
detectors (Hessian, gradient map, closed-form sets) is available in closed
form and is carried on the :class:`PhaseSpec` catalog entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bumps import ramp, ramp_prime
from .grid import ConfigurationError


_QUAD_LABELS = {(1, 1): "++", (1, -1): "+-", (-1, 1): "-+", (-1, -1): "--"}
_CUBIC_LABELS = {(1, 1, 1): "+++", (1, -1, -1): "+--", (-1, 1, 1): "-++", (-1, -1, -1): "---"}


def _slot_matrix(signs: tuple) -> np.ndarray:
    """Slot-space matrix M with phi(p) = p^T (M kron I2) p."""
    if len(signs) == 2:
        terms = [(-1.0, (1.0, 0.0)), (signs[0], (0.0, 1.0)), (signs[1], (1.0, -1.0))]
        d = 2
    else:
        terms = [(-1.0, (1.0, 0.0, 0.0)), (signs[0], (1.0, -1.0, 0.0)),
                 (signs[1], (0.0, 1.0, -1.0)), (signs[2], (0.0, 0.0, 1.0))]
        d = 3
    m = np.zeros((d, d))
    for c, w in terms:
        w = np.asarray(w)
        m += c * np.outer(w, w)
    return m


@dataclass(frozen=True)
class PhaseSpec:
    """Sign pattern selecting one of the eight interaction phases."""

    signs: tuple

    def __post_init__(self) -> None:
        if self.signs not in _QUAD_LABELS and self.signs not in _CUBIC_LABELS:
            raise ConfigurationError(f"unsupported sign pattern {self.signs}")

    @classmethod
    def from_label(cls, label: str) -> "PhaseSpec":
        table = {v: k for k, v in {**_QUAD_LABELS, **_CUBIC_LABELS}.items()}
        if label not in table:
            raise ConfigurationError(f"unknown phase label {label!r}")
        return cls(signs=table[label])

    @property
    def label(self) -> str:
        return _QUAD_LABELS.get(self.signs) or _CUBIC_LABELS[self.signs]

    @property
    def arity(self) -> int:
        return len(self.signs)

    @property
    def slots(self) -> int:
        return self.arity

    @property
    def dim(self) -> int:
        return 2 * self.arity

    @property
    def slot_matrix(self) -> np.ndarray:
        return _slot_matrix(self.signs)

    @property
    def full_matrix(self) -> np.ndarray:
        return np.kron(self.slot_matrix, np.eye(2))

    @property
    def grad_matrix(self) -> np.ndarray:
        """Linear map p -> gradient of phi in the (eta[, sigma]) components."""
        return 2.0 * self.full_matrix[2:, :]

    @property
    def has_space_cutoff(self) -> bool:
        """Whether the R/S/T partition carries a nontrivial S piece.

        For the all-minus patterns time resonance is just the origin and one
        takes the S cutoff identically zero."""
        return self.label not in ("--", "---")

    @property
    def partitionable(self) -> bool:
        """Phases whose space-time resonant set is confined to the unit ball,
        so that an R/S/T partition of unity exists."""
        return self.label in ("++", "--", "+++", "+--", "---")


ALL_PHASES = tuple(
    PhaseSpec.from_label(lbl) for lbl in ("++", "+-", "-+", "--", "+++", "+--", "-++", "---")
)


def stack(*args: np.ndarray) -> np.ndarray:
    """Stack per-slot (..., 2) frequency arrays into (..., 2d) points."""
    return np.concatenate([np.asarray(a, dtype=float) for a in args], axis=-1)


def unstack(p: np.ndarray, arity: int) -> list[np.ndarray]:
    return [p[..., 2 * i:2 * i + 2] for i in range(arity)]


def phase_eval(spec: PhaseSpec, *args: np.ndarray) -> np.ndarray:
    """Exact evaluation of the quadratic phase at (xi, eta[, sigma])."""
    p = stack(*args) if len(args) > 1 else np.asarray(args[0], dtype=float)
    a = spec.full_matrix
    return np.einsum("...i,ij,...j->...", p, a, p)


def phase_grad(spec: PhaseSpec, wrt: str, *args: np.ndarray) -> np.ndarray:
    """Closed-form gradient of phi with respect to a subset of variables.

    ``wrt`` is one of "xi", "eta", "sigma", "eta,sigma" or "all"; the result
    stacks the requested components along the last axis.
    """
    p = stack(*args) if len(args) > 1 else np.asarray(args[0], dtype=float)
    full = 2.0 * np.einsum("ij,...j->...i", spec.full_matrix, p)
    spans = {"xi": (0, 2), "eta": (2, 4), "sigma": (4, 6),
             "eta,sigma": (2, 2 * spec.arity), "all": (0, 2 * spec.arity)}
    if wrt not in spans:
        raise ConfigurationError(f"unknown variable subset {wrt!r}")
    lo, hi = spans[wrt]
    if hi > 2 * spec.arity:
        raise ConfigurationError(f"{wrt!r} not available for arity {spec.arity}")
    return full[..., lo:hi]


def check_null_identity(xi, eta, sigma) -> np.ndarray:
    """Residual of the -++ null identity: d_xi phi + 2 d_eta phi + d_sigma phi.

    Identically zero (to machine precision) for every input.
    """
    spec = PhaseSpec.from_label("-++")
    gx = phase_grad(spec, "xi", xi, eta, sigma)
    ge = phase_grad(spec, "eta", xi, eta, sigma)
    gs = phase_grad(spec, "sigma", xi, eta, sigma)
    return gx + 2.0 * ge + gs


def ibp_residual(spec: PhaseSpec, s: float, *args: np.ndarray) -> np.ndarray:
    """Residual of the oscillatory integration-by-parts identity.

    ``(1/(i s |grad phi|^2)) grad phi . grad[e^{is phi}] - e^{is phi}``
    with the (eta[, sigma])-gradient in closed form; identically zero away
    from the space-resonant set.
    """
    g = phase_grad(spec, "eta" if spec.arity == 2 else "eta,sigma", *args)
    g2 = np.sum(g * g, axis=-1)
    phi = phase_eval(spec, *args)
    osc = np.exp(1j * s * phi)
    # grad[e^{is phi}] = is (grad phi) e^{is phi}
    lhs = (1.0 / (1j * s * g2)) * np.sum(g * (1j * s * g * osc[..., None]), axis=-1)
    return lhs - osc


# ---------------------------------------------------------------------------
# closed-form resonant sets


def _linear_basis(vectors: list) -> np.ndarray:
    """Orthonormal basis (columns) of the span of slot-space direction vectors
    tensored with the plane."""
    if not vectors:
        return np.zeros((0, 0))
    rows = [np.kron(np.asarray(v, dtype=float), e) for v in vectors for e in (np.array([1.0, 0]), np.array([0, 1.0]))]
    a = np.stack(rows, axis=1)
    q, _ = np.linalg.qr(a)
    return q


@dataclass(frozen=True)
class LinearSet:
    """A linear subspace given by an orthonormal basis (columns); the empty
    basis denotes the origin."""

    dim_total: int
    basis: np.ndarray = field(repr=False)

    def distance(self, pts: np.ndarray) -> np.ndarray:
        if self.basis.size == 0:
            return np.linalg.norm(pts, axis=-1)
        proj = pts @ self.basis @ self.basis.T
        return np.linalg.norm(pts - proj, axis=-1)

    def sample(self, box_radius: float, spacing: float) -> np.ndarray:
        if self.basis.size == 0:
            return np.zeros((1, self.dim_total))
        k = self.basis.shape[1]
        half = box_radius * math.sqrt(self.dim_total)
        n = max(2, int(np.ceil(2 * half / spacing)) + 1)
        axes = [np.linspace(-half, half, n)] * k
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
        pts = mesh @ self.basis.T
        keep = np.max(np.abs(pts), axis=1) <= box_radius
        return pts[keep]


def space_set(spec: PhaseSpec) -> LinearSet:
    """S = kernel of the (eta[, sigma])-gradient map, as a linear set."""
    g = spec.grad_matrix
    _, s, vh = np.linalg.svd(g)
    rank = int(np.sum(s > 1e-12 * s[0]))
    basis = vh[rank:].T.copy()
    return LinearSet(dim_total=spec.dim, basis=basis if basis.size else np.zeros((0, 0)))


def spacetime_set(spec: PhaseSpec) -> LinearSet:
    """R = S intersect T; linear (a point, a plane, or the -++ line bundle)."""
    label = spec.label
    if label in ("++", "--", "+++", "+--", "---"):
        return LinearSet(dim_total=spec.dim, basis=np.zeros((0, 0)))
    if label in ("-+", "+-"):
        return LinearSet(dim_total=4, basis=_linear_basis([(0.0, 1.0)]))
    # -++ : xi = sigma = eta / 2
    return LinearSet(dim_total=6, basis=_linear_basis([(1.0, 2.0, 1.0)]))


def time_set_sample(spec: PhaseSpec, box_radius: float, spacing: float) -> np.ndarray:
    """Dense parametric sample of the time-resonant set within the box."""
    b = box_radius
    label = spec.label
    n = max(4, int(np.ceil(2 * b / spacing)) + 1)
    ax = np.linspace(-b, b, n)

    if label in ("--", "---"):
        return np.zeros((1, spec.dim))

    if label == "++":
        # eta on the circle of center xi/2, radius |xi|/2, for each xi
        g1, g2 = np.meshgrid(ax, ax, indexing="ij")
        xi = np.stack([g1.ravel(), g2.ravel()], axis=-1)
        rad = 0.5 * np.linalg.norm(xi, axis=-1)
        n_ang = max(8, int(np.ceil(2 * np.pi * np.max(rad) / spacing)))
        tau = np.linspace(0, 2 * np.pi, n_ang, endpoint=False)
        eta = (0.5 * xi[:, None, :]
               + rad[:, None, None] * np.stack([np.cos(tau), np.sin(tau)], axis=-1)[None, :, :])
        pts = np.concatenate([np.broadcast_to(xi[:, None, :], eta.shape), eta], axis=-1)
        pts = pts.reshape(-1, 4)
        return pts[np.max(np.abs(pts), axis=1) <= b]

    if label in ("-+", "+-"):
        # {xi . eta = 0} resp. {xi . (eta - xi) = 0}: lines over each xi, plus the xi=0 plane
        g1, g2 = np.meshgrid(ax, ax, indexing="ij")
        xi = np.stack([g1.ravel(), g2.ravel()], axis=-1)
        nz = np.linalg.norm(xi, axis=-1) > 0
        xi = xi[nz]
        perp = np.stack([-xi[:, 1], xi[:, 0]], axis=-1)
        perp /= np.linalg.norm(perp, axis=-1, keepdims=True)
        smax = b * math.sqrt(2.0)
        ns = max(4, int(np.ceil(2 * smax / spacing)) + 1)
        svals = np.linspace(-smax, smax, ns)
        eta = svals[None, :, None] * perp[:, None, :]
        if label == "+-":
            eta = eta + xi[:, None, :]
        pts = np.concatenate([np.broadcast_to(xi[:, None, :], eta.shape), eta], axis=-1).reshape(-1, 4)
        plane = np.zeros((len(ax) ** 2, 4))
        plane[:, 2] = g1.ravel()
        plane[:, 3] = g2.ravel()
        pts = np.concatenate([pts, plane], axis=0)
        return pts[np.max(np.abs(pts), axis=1) <= b]

    # cubic quadrics, in interaction coordinates v1 = xi-eta, v2 = eta-sigma, v3 = sigma
    e1, e2, e3 = spec.signs
    vax = np.linspace(-b, b, max(4, int(np.ceil(2 * b / spacing)) + 1))
    g = np.meshgrid(vax, vax, vax, vax, indexing="ij")
    v1 = np.stack([g[0].ravel(), g[1].ravel()], axis=-1)
    v2 = np.stack([g[2].ravel(), g[3].ravel()], axis=-1)
    c = v1 + v2
    out = []

    def to_xes(v1a, v2a, v3a):
        xi = v1a + v2a + v3a
        eta = v2a + v3a
        return np.concatenate([xi, eta, v3a], axis=-1)

    if e3 == 1:
        # linear constraint in v3: 2 c . v3 = e1|v1|^2 + e2|v2|^2 - |c|^2
        rhs = (e1 * np.sum(v1**2, -1) + e2 * np.sum(v2**2, -1) - np.sum(c**2, -1))
        cn = np.linalg.norm(c, axis=-1)
        nz = cn > 1e-12
        base = 0.5 * rhs[nz, None] * c[nz] / cn[nz, None] ** 2
        cperp = np.stack([-c[nz, 1], c[nz, 0]], axis=-1) / cn[nz, None]
        smax = b * math.sqrt(2.0)
        ns = max(4, int(np.ceil(2 * smax / spacing)) + 1)
        svals = np.linspace(-smax, smax, ns)
        v3 = base[:, None, :] + svals[None, :, None] * cperp[:, None, :]
        pts = to_xes(np.broadcast_to(v1[nz, None, :], v3.shape),
                     np.broadcast_to(v2[nz, None, :], v3.shape), v3).reshape(-1, 6)
        out.append(pts)
        # degenerate branch c = 0 (v2 = -v1)
        if e1 + e2 == 0:
            # whole plane {v2 = -v1, v3 free} lies in T
            g3 = np.meshgrid(vax, vax, vax, vax, indexing="ij")
            w1 = np.stack([g3[0].ravel(), g3[1].ravel()], axis=-1)
            w3 = np.stack([g3[2].ravel(), g3[3].ravel()], axis=-1)
            out.append(to_xes(w1, -w1, w3))
        else:
            # only v1 = v2 = 0 survives: the sigma axis
            w3 = np.stack(np.meshgrid(vax, vax, indexing="ij"), axis=-1).reshape(-1, 2)
            out.append(to_xes(np.zeros_like(w3), np.zeros_like(w3), w3))
    else:
        # circle in v3: |v3 + c/2|^2 = (e1|v1|^2 + e2|v2|^2 - |c|^2/2) / 2
        r2 = 0.5 * (e1 * np.sum(v1**2, -1) + e2 * np.sum(v2**2, -1) - 0.5 * np.sum(c**2, -1))
        ok = r2 >= 0
        rad = np.sqrt(r2[ok])
        n_ang = max(8, int(np.ceil(2 * np.pi * max(np.max(rad), spacing) / spacing)))
        tau = np.linspace(0, 2 * np.pi, n_ang, endpoint=False)
        circ = np.stack([np.cos(tau), np.sin(tau)], axis=-1)
        v3 = -0.5 * c[ok, None, :] + rad[:, None, None] * circ[None, :, :]
        pts = to_xes(np.broadcast_to(v1[ok, None, :], v3.shape),
                     np.broadcast_to(v2[ok, None, :], v3.shape), v3).reshape(-1, 6)
        out.append(pts)

    pts = np.concatenate(out, axis=0)
    return pts[np.max(np.abs(pts), axis=1) <= b]


# ---------------------------------------------------------------------------
# resonant-set detection


@dataclass(frozen=True)
class ResonantSets:
    spec: PhaseSpec
    box_radius: float
    spacing: float
    tol: float
    s_points: np.ndarray = field(repr=False)
    t_points: np.ndarray = field(repr=False)
    r_points: np.ndarray = field(repr=False)
    s_residual: np.ndarray = field(repr=False)
    t_residual: np.ndarray = field(repr=False)


def coverage_tolerance(spec: PhaseSpec, spacing: float) -> float:
    """Smallest ``tol`` guaranteed (by exact Taylor expansion of the quadratic
    phase) to detect a lattice neighbor of every true set point."""
    r = spacing * math.sqrt(spec.dim) / 2.0
    a_norm = float(np.linalg.norm(spec.full_matrix, 2))
    g_norm = float(np.linalg.norm(spec.grad_matrix, 2))
    return 1.01 * max(a_norm * r * (2.0 + r), g_norm * r)


def lattice_residuals(spec: PhaseSpec, ax: np.ndarray):
    """|phi|, |grad_(eta,sigma) phi| and 1 + |p| on the tensor-product lattice
    ``ax^dim``, evaluated by broadcasting (no point materialization)."""
    d = spec.dim
    a_full = spec.full_matrix
    g_full = spec.grad_matrix

    def axis_view(i):
        shape = [1] * d
        shape[i] = len(ax)
        return ax.reshape(shape)

    views = [axis_view(i) for i in range(d)]
    full = (len(ax),) * d
    phi = np.zeros(full)
    for i in range(d):
        if a_full[i, i] != 0:
            phi += a_full[i, i] * views[i] * views[i]
        for j in range(i + 1, d):
            if a_full[i, j] != 0:
                phi += 2.0 * a_full[i, j] * views[i] * views[j]
    grad_sq = np.zeros(full)
    for row in g_full:
        lin = np.zeros(full)
        for i in range(d):
            if row[i] != 0:
                lin += row[i] * views[i]
        grad_sq += lin * lin
    norm_sq = np.zeros(full)
    for i in range(d):
        norm_sq += views[i] * views[i]
    return np.abs(phi), np.sqrt(grad_sq), 1.0 + np.sqrt(norm_sq)


def resonant_sets(spec: PhaseSpec, box_radius: float = 4.0, points_per_axis: int = 33,
                  tol: Optional[float] = None) -> ResonantSets:
    """Extract S/T/R point clouds on a uniform search lattice.

    Detection: ``|grad_(eta,sigma) phi| < tol * scale`` for S,
    ``|phi| < tol * scale^2`` for T, both for R, with ``scale = |p| + 1`` so
    that the degree-1 gradient and degree-2 phase are detected uniformly
    across the box.  The default (fine) tolerance keeps the R cloud within
    one lattice cell of the closed-form set; pass
    :func:`coverage_tolerance` instead to make the S/T clouds cover every
    point of their sets at the cost of proportionally thicker clouds.
    """
    if tol is not None and not tol > 0:
        raise ConfigurationError("tol must be positive")
    ax = np.linspace(-box_radius, box_radius, points_per_axis)
    h = ax[1] - ax[0]
    if tol is None:
        tol = 1e-7 * h

    phi, grad, scale = lattice_residuals(spec, ax)
    in_s = grad < tol * scale
    in_t = phi < tol * scale**2
    in_r = in_s & in_t

    def extract(mask):
        idx = np.argwhere(mask)
        return ax[idx], phi[mask], grad[mask]

    s_pts, s_phi, s_grad = extract(in_s)
    t_pts, t_phi, t_grad = extract(in_t)
    r_pts, _, _ = extract(in_r)
    return ResonantSets(
        spec=spec, box_radius=box_radius, spacing=h, tol=tol,
        s_points=s_pts, t_points=t_pts, r_points=r_pts,
        s_residual=np.stack([s_phi, s_grad], -1),
        t_residual=np.stack([t_phi, t_grad], -1),
    )


def cloud_rows(sets: ResonantSets):
    """Rows (coords..., |phi|, |grad phi|, classification) for CSV export."""
    rows = []
    for pts, res_cols, tag in ((sets.s_points, sets.s_residual, "S"),
                               (sets.t_points, sets.t_residual, "T")):
        for p, (phi, grad) in zip(pts, res_cols):
            rows.append((*p, phi, grad, tag))
    a = sets.spec.full_matrix
    g = sets.spec.grad_matrix
    for p in sets.r_points:
        rows.append((*p, abs(float(p @ a @ p)), float(np.linalg.norm(g @ p)), "R"))
    return rows


# ---------------------------------------------------------------------------
# cutoff partitions


class CoverageError(RuntimeError):
    """build_cutoffs produced a point with vanishing total weight."""


@dataclass(frozen=True)
class CutoffFamily:
    """The (chi^R, chi^S, chi^T) partition of unity for a phase, dilated by
    sqrt(t).

    chi^R is a radial bump (1 inside the unit ball, 0 outside radius 2,
    pre-dilation); outside, the leftover is split by degree-0 resonance
    coordinates: the normalized phase a = phi/r^2 drives the T cutoff (which
    vanishes for |a| <= delta_t, a conical neighborhood of the time-resonant
    set) and the normalized distance to the space-resonant subspace drives
    the S cutoff.  Dilation is exact: chi_t(p) = chi_1(sqrt(t) p).
    """

    spec: PhaseSpec
    t: float
    delta_t: float
    delta_s: float
    _s_projector: np.ndarray = field(repr=False)

    def _base_parts(self, q: np.ndarray):
        """chi^R, chi^S, chi^T at the undilated points q (shape (..., 2d))."""
        r = np.linalg.norm(q, axis=-1)
        beta = ramp(r, 1.0, 2.0)
        chi_r = 1.0 - beta
        if not self.spec.has_space_cutoff:
            return chi_r, np.zeros_like(beta), beta
        w_t, w_s = self._weights(q, r)
        den = w_t + w_s
        safe = np.where(den > 0, den, 1.0)
        chi_t = beta * w_t / safe
        chi_s = beta * w_s / safe
        return chi_r, chi_s, chi_t

    def _weights(self, q: np.ndarray, r: np.ndarray):
        safe_r = np.where(r > 0, r, 1.0)
        a = phase_eval(self.spec, q) / safe_r**2
        c = np.linalg.norm(q - q @ self._s_projector, axis=-1) / safe_r
        w_t = ramp(np.abs(a), self.delta_t, 2 * self.delta_t)
        w_s = ramp(c, self.delta_s, 2 * self.delta_s)
        return w_t, w_s

    def _dilated(self, *args: np.ndarray) -> np.ndarray:
        p = stack(*args) if len(args) > 1 else np.asarray(args[0], dtype=float)
        return math.sqrt(self.t) * p

    def chi_r(self, *args) -> np.ndarray:
        return self._base_parts(self._dilated(*args))[0]

    def chi_s(self, *args) -> np.ndarray:
        return self._base_parts(self._dilated(*args))[1]

    def chi_t(self, *args) -> np.ndarray:
        return self._base_parts(self._dilated(*args))[2]

    def chi_t_time_derivative(self, *args) -> np.ndarray:
        """Closed-form d/dt of chi^T_t at the family's own t.

        Only the radial bump feels the dilation (the resonance coordinates
        are homogeneous of degree 0), so the derivative is supported exactly
        in the dilated transition annulus 1/sqrt(t) <= |p| <= 2/sqrt(t).
        """
        q = self._dilated(*args)
        r = np.linalg.norm(q, axis=-1)
        radial = r * ramp_prime(r, 1.0, 2.0) / (2.0 * self.t)
        if not self.spec.has_space_cutoff:
            return radial
        w_t, w_s = self._weights(q, r)
        den = w_t + w_s
        safe = np.where(den > 0, den, 1.0)
        frac = np.where(den > 0, w_t / safe, 0.0)
        return radial * frac

    def parts(self, *args) -> tuple:
        """(chi_r, chi_s, chi_t, d/dt chi_t) in a single evaluation pass."""
        q = self._dilated(*args)
        r = np.linalg.norm(q, axis=-1)
        beta = ramp(r, 1.0, 2.0)
        radial = r * ramp_prime(r, 1.0, 2.0) / (2.0 * self.t)
        if not self.spec.has_space_cutoff:
            return 1.0 - beta, np.zeros_like(beta), beta, radial
        w_t, w_s = self._weights(q, r)
        den = w_t + w_s
        safe = np.where(den > 0, den, 1.0)
        frac = np.where(den > 0, w_t / safe, 0.0)
        return 1.0 - beta, beta * (w_s / safe), beta * frac, radial * frac


def build_cutoffs(spec: PhaseSpec, t: float, delta_t: float = 0.1,
                  delta_s: float = 0.1, coverage_floor: float = 0.05,
                  check_points: int = 4096) -> CutoffFamily:
    """Build the R/S/T partition for a partitionable phase at dilation time t.

    Raises :class:`CoverageError` when the requested neighborhood widths are
    so large that some direction is excluded by both the S and the T cutoff
    (total weight below ``coverage_floor`` before renormalization).
    """
    if not spec.partitionable:
        raise ConfigurationError(
            f"phase {spec.label} has an unbounded space-time resonant set; "
            "no R/S/T partition exists (use the neighborhood cutoff instead)")
    if not t > 0:
        raise ConfigurationError("dilation time must be positive")
    sset = space_set(spec)
    proj = (sset.basis @ sset.basis.T if sset.basis.size
            else np.zeros((spec.dim, spec.dim)))
    fam = CutoffFamily(spec=spec, t=t, delta_t=delta_t, delta_s=delta_s,
                       _s_projector=proj)
    if spec.has_space_cutoff:
        rng = np.random.default_rng(13)
        dirs = rng.standard_normal((check_points, spec.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pts = np.concatenate([rad * dirs for rad in (1.05, 1.3, 1.7, 2.5, 5.0)])
        w_t, w_s = fam._weights(pts, np.linalg.norm(pts, axis=-1))
        den = w_t + w_s
        if np.min(den) < coverage_floor:
            worst = pts[int(np.argmin(den))]
            raise CoverageError(
                f"build_cutoffs: delta_t={delta_t}, delta_s={delta_s} leave "
                f"direction {worst / np.linalg.norm(worst)} (|p|={np.linalg.norm(worst):.3g}) "
                f"with total weight {float(np.min(den)):.3g} < {coverage_floor}")
    return fam


def neighborhood_cutoff(spec: PhaseSpec, width: float = 0.2) -> Callable:
    """Degree-0 cutoff equal to 1 near the space-time resonant subspace and 0
    once the normalized distance exceeds twice the width (the -++ device;
    on its support all three frequencies are comparable)."""
    rset = spacetime_set(spec)
    proj = rset.basis @ rset.basis.T if rset.basis.size else np.zeros((spec.dim, spec.dim))

    def chi(*args) -> np.ndarray:
        p = stack(*args) if len(args) > 1 else np.asarray(args[0], dtype=float)
        r = np.linalg.norm(p, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        c = np.linalg.norm(p - p @ proj, axis=-1) / safe
        return 1.0 - ramp(c, width, 2 * width)

    return chi


@dataclass(frozen=True)
class SupportBounds:
    min_phase_on_t: float
    min_grad_on_s: Optional[float]
    phase_exponent: float
    grad_exponent: Optional[float]


def support_lower_bounds(family: CutoffFamily, samples: np.ndarray) -> SupportBounds:
    """Minimum |phi| over supp chi^T and |grad phi| over supp chi^S, with the
    growth exponents in (|p| + 1) fitted by log-log regression.

    A nonpositive minimum is a partition-construction bug and is fatal.
    """
    spec = family.spec
    pts = np.asarray(samples, dtype=float)
    phi = np.abs(phase_eval(spec, pts))
    grad = np.linalg.norm(pts @ spec.grad_matrix.T, axis=-1)
    scale = np.linalg.norm(pts, axis=-1) + 1.0

    on_t = family.chi_t(pts) > 0
    if not np.any(on_t):
        raise ConfigurationError("sample set misses supp chi^T entirely")
    min_phi = float(np.min(phi[on_t]))
    if min_phi <= 0:
        raise CoverageError("chi^T support touches the time-resonant set")
    exp_t = _fit_exponent(scale[on_t], phi[on_t])

    min_grad = None
    exp_s = None
    if spec.has_space_cutoff:
        on_s = family.chi_s(pts) > 0
        if np.any(on_s):
            min_grad = float(np.min(grad[on_s]))
            if min_grad <= 0:
                raise CoverageError("chi^S support touches the space-resonant set")
            exp_s = _fit_exponent(scale[on_s], grad[on_s])
    return SupportBounds(min_phase_on_t=min_phi, min_grad_on_s=min_grad,
                         phase_exponent=exp_t, grad_exponent=exp_s)


def _fit_exponent(scale: np.ndarray, values: np.ndarray, bins: int = 12) -> float:
    """Slope of log(min value per scale bin) against log(scale)."""
    logs = np.log(scale)
    edges = np.linspace(logs.min(), logs.max() + 1e-9, bins + 1)
    xs, ys = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (logs >= lo) & (logs < hi)
        if np.any(m):
            xs.append(0.5 * (lo + hi))
            ys.append(np.log(np.min(values[m])))
    if len(xs) < 2:
        return float("nan")
    coeff = np.polyfit(xs, ys, 1)
    return float(coeff[0])
