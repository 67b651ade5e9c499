"""Invariant battery behind the selftest subcommand.

Each check runs at desk size, returns (ok, detail), and scales its pass
threshold by ``selftest.tol_scale`` so that fault-injection configs (bad
cutoff widths, zeroed tolerances) fail loudly with the offending module
named.
"""

from __future__ import annotations

import math

import numpy as np

from .evolution import ExperimentConfig, integrate
from .grid import Field, gaussian, l2_norm, lp_norm, make_grid, propagate
from .lp import DyadicPartition, bernstein_ratio, theta
from .normalform import run_normal_form
from .pseudoproduct import apply_bilinear, paraproduct_pieces
from .resonance import (
    ALL_PHASES,
    CoverageError,
    PhaseSpec,
    build_cutoffs,
    check_null_identity,
    support_lower_bounds,
)
from .symbols import build_q, constant_symbol, separable_approx


def _random_field(grid, rng, band_limit=None) -> Field:
    n = grid.points
    coeff = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if band_limit is not None:
        idx = np.fft.fftfreq(n) * n
        keep = (np.abs(idx[:, None]) <= band_limit) & (np.abs(idx[None, :]) <= band_limit)
        coeff = np.where(keep, coeff, 0.0)
    return Field(grid, coeff, "frequency").to_physical()


def check_plancherel(cfg, tol, rng):
    g = make_grid(10.0, 32)
    worst = 0.0
    for _ in range(10):
        f = _random_field(g, rng)
        worst = max(worst, abs(l2_norm(f) - l2_norm(f.to_frequency())) / l2_norm(f))
    return worst <= 1e-12 * tol, f"max relative defect {worst:.2e}"

def check_propagator(cfg, tol, rng):
    g = make_grid(10.0, 32)
    f = _random_field(g, rng)
    a = propagate(propagate(f, 1.3), 2.1)
    b = propagate(f, 3.4)
    defect = l2_norm(a - b) / l2_norm(f)
    unit = abs(l2_norm(propagate(f, 5.0)) - l2_norm(f)) / l2_norm(f)
    ok = defect <= 1e-12 * tol and unit <= 1e-12 * tol
    return ok, f"group defect {defect:.2e}, unitarity defect {unit:.2e}"

def check_free_gaussian(cfg, tol, rng):
    g = make_grid(60.0, 256)
    f = gaussian(g, 1.0, 1.0)
    t = 1.5
    s = 1.0 + 2j * t
    exact = (1.0 / s) * np.exp(-(g.x1**2 + g.x2**2) / (2.0 * s))
    err = np.max(np.abs(propagate(f, t).values - exact))
    return err <= 1e-8 * tol, f"max pointwise error {err:.2e}"

def check_lp_partition(cfg, tol, rng):
    g = make_grid(16.0, 64)
    part = DyadicPartition.for_grid(g)
    r = np.sqrt(g.k_sq)
    total = sum(theta(r / 2.0**j) for j in part.bands)
    err = float(np.max(np.abs(total[r > 0] - 1.0)))
    return err <= 1e-10 * tol, f"partition defect {err:.2e}"

def check_lp_reconstruction(cfg, tol, rng):
    from .lp import project_band, project_low
    g = make_grid(12.0, 32)
    part = DyadicPartition.for_grid(g)
    f = _random_field(g, rng)
    acc = project_low(f, part.j_min)
    for j in part.bands:
        acc = acc + project_band(f, j)
    err = l2_norm(acc - f) / l2_norm(f)
    return err <= 1e-10 * tol, f"reconstruction defect {err:.2e}"

def check_bernstein_unit(cfg, tol, rng):
    g = make_grid(12.0, 32)
    f = _random_field(g, rng)
    part = DyadicPartition.for_grid(g)
    val = bernstein_ratio(f, part.j_min + 2, 2.0, 2.0)
    return abs(val - 1.0) <= 1e-12 * tol, f"p=q ratio {val}"

def check_q_anchors(cfg, tol, rng):
    q = build_q(tuple(float(c) for c in cfg["q.ell"]))
    far = q.eval(np.array([[3.0, 0.0]]), np.array([[0.0, 0.0]]))[0]
    zero = q.eval(np.zeros((1, 2)), np.zeros((1, 2)))[0]
    ok = abs(far - 1.0) <= 1e-12 * tol and abs(zero) <= 1e-12 * tol
    return ok, f"q(far)={far}, q(0)={zero}"

def check_null_identity_battery(cfg, tol, rng):
    pts = rng.standard_normal((10_000, 6)) * 5.0
    res = check_null_identity(pts[:, 0:2], pts[:, 2:4], pts[:, 4:6])
    worst = float(np.max(np.abs(res)))
    return worst <= 1e-12 * tol, f"max residual {worst:.2e}"

def check_cutoff_partitions(cfg, tol, rng):
    dt_, ds_ = float(cfg["cutoffs.delta_t"]), float(cfg["cutoffs.delta_s"])
    worst = 0.0
    for label in ("++", "--", "+++", "+--", "---"):
        spec = PhaseSpec.from_label(label)
        for t in (1.0, 4.0, 16.0):
            fam = build_cutoffs(spec, t, dt_, ds_)
            pts = rng.uniform(-5, 5, size=(2048, spec.dim))
            total = fam.chi_r(pts) + fam.chi_s(pts) + fam.chi_t(pts)
            worst = max(worst, float(np.max(np.abs(total - 1.0))))
            fam1 = build_cutoffs(spec, 1.0, dt_, ds_)
            dil = float(np.max(np.abs(fam.chi_t(pts) - fam1.chi_t(math.sqrt(t) * pts))))
            worst = max(worst, dil)
    return worst <= 1e-12 * tol, f"max partition/dilation defect {worst:.2e}"

def check_support_floors(cfg, tol, rng):
    spec = PhaseSpec.from_label("++")
    fam = build_cutoffs(spec, 1.0, float(cfg["cutoffs.delta_t"]), float(cfg["cutoffs.delta_s"]))
    pts = rng.uniform(-10, 10, size=(50_000, 4))
    out = support_lower_bounds(fam, pts)
    ok = out.min_phase_on_t > 0 and (out.min_grad_on_s or 0) > 0
    return ok, (f"min|phi| on T-support {out.min_phase_on_t:.3g}, "
                f"min|grad| on S-support {out.min_grad_on_s:.3g}")

def check_product_anchor(cfg, tol, rng):
    g = make_grid(8.0, 16)
    f = _random_field(g, rng)
    h = _random_field(g, rng)
    out = apply_bilinear(constant_symbol(2), f, h)
    err = np.max(np.abs(out.values - f.values * h.values))
    scale = np.max(np.abs(f.values * h.values))
    return err <= 1e-12 * tol * scale, f"anchor defect {err / scale:.2e}"

def check_oracle_equivalence(cfg, tol, rng):
    g = make_grid(8.0, 16)
    q = build_q(tuple(float(c) for c in cfg["q.ell"]))
    sep = separable_approx(q, g, rank=g.points**2)
    worst = 0.0
    for _ in range(5):
        f = _random_field(g, rng, band_limit=3)
        h = _random_field(g, rng, band_limit=3)
        a = apply_bilinear(q, f, h)
        b = apply_bilinear(sep, f, h, method="separable")
        worst = max(worst, l2_norm(a - b) / max(l2_norm(a), 1e-300))
    return worst <= 1e-10 * tol, f"max path disagreement {worst:.2e}"

def check_paraproduct(cfg, tol, rng):
    g = make_grid(8.0, 32)
    worst = 0.0
    for _ in range(5):
        f = _random_field(g, rng)
        h = _random_field(g, rng)
        hl, lh, hh = paraproduct_pieces(f, h)
        total = hl.values + lh.values + hh.values
        prod = f.values * h.values
        worst = max(worst, np.max(np.abs(total - prod)) / np.max(np.abs(prod)))
    return worst <= 1e-12 * tol, f"max reconstruction defect {worst:.2e}"

def check_profile_constancy(cfg, tol, rng):
    run = ExperimentConfig(points=16, box_size=12.0, eps=0.02, alpha=0, beta=0,
                           t_final=4.0, dt=0.1, out_every=1.0)
    traj = integrate(run)
    drift = l2_norm(traj.fields[-1] - traj.fields[0]) / l2_norm(traj.fields[0])
    return drift <= 1e-11 * tol, f"profile drift {drift:.2e}"

def check_normalform_residual(cfg, tol, rng):
    run = ExperimentConfig(points=16, box_size=12.0, eps=0.01, t_final=4.0,
                           dt=0.1, out_every=1.0)
    res = run_normal_form(run, cadence=int(cfg["normalform.cadence"]),
                          delta_t=float(cfg["cutoffs.delta_t"]),
                          delta_s=float(cfg["cutoffs.delta_s"]))
    worst = max(res.residuals())
    return worst <= 1e-6 * tol, f"max decomposition residual {worst:.2e}"


BATTERY = [
    ("spectral_core.plancherel", check_plancherel),
    ("spectral_core.propagator", check_propagator),
    ("spectral_core.free_gaussian", check_free_gaussian),
    ("lp_toolkit.partition_of_unity", check_lp_partition),
    ("lp_toolkit.reconstruction", check_lp_reconstruction),
    ("lp_toolkit.bernstein_unit", check_bernstein_unit),
    ("symbol_algebra.q_anchors", check_q_anchors),
    ("resonance.null_identity", check_null_identity_battery),
    ("resonance.build_cutoffs", check_cutoff_partitions),
    ("resonance.support_floors", check_support_floors),
    ("pseudo_product.product_anchor", check_product_anchor),
    ("pseudo_product.oracle_equivalence", check_oracle_equivalence),
    ("pseudo_product.paraproduct", check_paraproduct),
    ("evolution.profile_constancy", check_profile_constancy),
    ("normal_form.residual", check_normalform_residual),
]


def run_selftest(cfg: dict, seed: int = 0, only=None):
    """Run the battery; returns (all_ok, [(name, ok, detail), ...]).

    ``only`` restricts to invariant names containing any of the given
    substrings (used by targeted tests; the CLI always runs everything).
    """
    tol = float(cfg["selftest.tol_scale"])
    results = []
    battery = BATTERY if only is None else [
        (name, fn) for name, fn in BATTERY if any(s in name for s in only)]
    for name, fn in battery:
        rng = np.random.default_rng(seed + hash(name) % 65536)
        try:
            ok, detail = fn(cfg, tol, rng)
        except CoverageError as err:
            ok, detail = False, f"{err}"
        except Exception as err:  # noqa: BLE001 - report, never crash the battery
            ok, detail = False, f"unexpected {type(err).__name__}: {err}"
        results.append((name, ok, detail))
    return all(ok for _, ok, _ in results), results
