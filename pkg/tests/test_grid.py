"""Spectral core: transforms, propagator, weighted norms."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resokit.grid import (
    BoundaryContaminationWarning,
    ConfigurationError,
    Field,
    boundary_fraction,
    embed,
    gaussian,
    l2_norm,
    load_snapshot,
    lp_norm,
    make_grid,
    propagate,
    save_snapshot,
    weighted_norm,
)

from conftest import random_field


def free_gaussian(grid, t, amplitude=1.0, width=1.0):
    """Closed-form free evolution of a centered Gaussian under the
    exp(-i t |xi|^2) convention: solves du/dt = i*Lap(u)."""
    s = width**2 + 2j * t
    r2 = grid.x1**2 + grid.x2**2
    return amplitude * (width**2 / s) * np.exp(-r2 / (2.0 * s))


class TestMakeGrid:
    def test_unit_spacing_box(self):
        g = make_grid(2 * np.pi, 8)
        assert g.dxi == pytest.approx(1.0)
        ints = sorted(set(np.round(g.k1.ravel()).astype(int)))
        assert ints == list(range(-4, 4))

    def test_spacing_l64(self):
        g = make_grid(64.0, 256)
        assert g.dxi == pytest.approx(2 * np.pi / 64)
        assert g.dxi == pytest.approx(0.0982, abs=1e-4)
        assert g.xi_max == pytest.approx(np.pi * 256 / 64)

    @pytest.mark.parametrize("L,N", [(0.0, 8), (-1.0, 16), (10.0, 7), (10.0, 4)])
    def test_rejects_bad_config(self, L, N):
        with pytest.raises(ConfigurationError):
            make_grid(L, N)


class TestTransforms:
    def test_round_trip(self, rng):
        g = make_grid(10.0, 32)
        f = random_field(g, rng)
        back = f.to_frequency().to_physical()
        num = np.linalg.norm(back.values - f.values)
        assert num <= 1e-12 * np.linalg.norm(f.values)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_plancherel(self, seed):
        g = make_grid(7.0, 16)
        f = random_field(g, np.random.default_rng(seed))
        a = l2_norm(f)
        b = l2_norm(f.to_frequency())
        assert abs(a - b) <= 1e-12 * max(a, 1e-300)


class TestPropagate:
    def test_identity_at_zero(self, rng):
        g = make_grid(9.0, 16)
        f = random_field(g, rng)
        out = propagate(f, 0.0)
        assert np.allclose(out.values, f.values, atol=1e-15)

    def test_single_mode_phase(self):
        g = make_grid(2 * np.pi, 16)
        coeff = np.zeros((16, 16), dtype=complex)
        coeff[1, 0] = 1.0  # mode xi = (1, 0)
        f = Field(g, coeff, "frequency")
        out = propagate(f, np.pi)
        assert out.values[1, 0] == pytest.approx(-1.0)

    def test_unitary(self, rng):
        g = make_grid(11.0, 32)
        f = random_field(g, rng)
        assert l2_norm(propagate(f, 3.7)) == pytest.approx(l2_norm(f), rel=1e-12)

    @given(s=st.floats(-5, 5), t=st.floats(-5, 5))
    @settings(max_examples=20, deadline=None)
    def test_group_law(self, s, t):
        g = make_grid(8.0, 16)
        f = random_field(g, np.random.default_rng(7))
        a = propagate(propagate(f, s), t)
        b = propagate(f, s + t)
        assert np.linalg.norm(a.values - b.values) <= 1e-12 * np.linalg.norm(f.values)

    def test_gaussian_closed_form(self):
        g = make_grid(60.0, 256)
        f = gaussian(g, amplitude=1.0, width=1.0)
        for t in (0.5, 2.0):
            out = propagate(f, t)
            exact = free_gaussian(g, t)
            assert np.max(np.abs(out.values - exact)) <= 1e-8


class TestWeightedNorm:
    def test_zero_field(self):
        g = make_grid(16.0, 16)
        z = Field(g, np.zeros((16, 16), dtype=complex))
        for w in (0, 1, 2):
            assert weighted_norm(z, w, 2.0) == 0.0

    def test_single_cell_x2_weight(self):
        g = make_grid(16.0, 32)
        v = np.zeros((32, 32), dtype=complex)
        i = int(round((3.0 + 8.0) / g.dx))
        j = int(round((4.0 + 8.0) / g.dx))
        assert g.x1[i, j] == pytest.approx(3.0)
        assert g.x2[i, j] == pytest.approx(4.0)
        v[i, j] = 1.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryContaminationWarning)
            got = weighted_norm(Field(g, v), 2, 2.0)
        assert got == pytest.approx(25.0 * math.sqrt(g.dx**2), rel=1e-12)

    def test_gaussian_l2_closed_form(self):
        # ||exp(-|x|^2/(2 w^2))||_2 = w * sqrt(pi)
        g = make_grid(30.0, 128)
        w = 1.3
        f = gaussian(g, 1.0, w)
        assert weighted_norm(f, 0, 2.0) == pytest.approx(w * math.sqrt(math.pi), abs=1e-10)

    def test_boundary_warning(self):
        g = make_grid(10.0, 32)
        f = gaussian(g, 1.0, 6.0)  # fat Gaussian touches the boundary
        assert boundary_fraction(f) > 1e-8
        with pytest.warns(BoundaryContaminationWarning):
            weighted_norm(f, 2, 2.0)

    def test_infinity_norm(self):
        g = make_grid(12.0, 16)
        f = gaussian(g, 2.5, 1.0)
        assert lp_norm(f, np.inf) == pytest.approx(2.5)


class TestDispersiveDecay:
    def test_sup_norm_decay_constant(self):
        # ||U(t) f||_inf * t / ||f||_1 stays within 5% of constant on [10, 100]
        g = make_grid(512.0, 1024)
        f = gaussian(g, 1.0, 1.5)
        n1 = lp_norm(f, 1.0)
        ratios = []
        for t in (10.0, 20.0, 40.0, 70.0, 100.0):
            sup = lp_norm(propagate(f, t), np.inf)
            ratios.append(sup * t / n1)
        assert max(ratios) / min(ratios) - 1.0 <= 0.05
        # around the free constant 1/(4 pi)
        assert ratios[-1] == pytest.approx(1.0 / (4 * np.pi), rel=0.05)


class TestEmbedSnapshot:
    def test_embed_preserves_values_and_norm(self, rng):
        g = make_grid(8.0, 16)
        f = gaussian(g, 1.0, 0.8)
        big = embed(f, 4)
        assert big.grid.box_size == 32.0
        assert l2_norm(big) == pytest.approx(l2_norm(f), rel=1e-12)
        assert lp_norm(big, np.inf) == pytest.approx(lp_norm(f, np.inf), rel=1e-12)

    def test_snapshot_round_trip(self, tmp_path, rng):
        g = make_grid(6.0, 16)
        f = random_field(g, rng).to_frequency()
        p = tmp_path / "field.npz"
        save_snapshot(p, f)
        back = load_snapshot(p)
        assert back.grid == f.grid
        assert back.rep == f.rep
        assert np.array_equal(back.values, f.values)
