"""Phases, resonant sets, the null identity, and cutoff partitions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import cKDTree

from resokit.grid import ConfigurationError
from resokit.resonance import (
    ALL_PHASES,
    CoverageError,
    PhaseSpec,
    build_cutoffs,
    check_null_identity,
    coverage_tolerance,
    ibp_residual,
    neighborhood_cutoff,
    phase_eval,
    phase_grad,
    resonant_sets,
    space_set,
    spacetime_set,
    support_lower_bounds,
    time_set_sample,
)


def v(*coords):
    return np.array(coords, dtype=float)


class TestPhaseEval:
    def test_pp_time_resonant_point(self):
        spec = PhaseSpec.from_label("++")
        # eta . (xi - eta) = 0 here, so the phase vanishes
        assert phase_eval(spec, v(1, 1), v(1, 0)) == pytest.approx(0.0)

    def test_origin(self):
        spec = PhaseSpec.from_label("--")
        assert phase_eval(spec, v(0, 0), v(0, 0)) == pytest.approx(0.0)

    def test_pp_value(self):
        spec = PhaseSpec.from_label("++")
        assert phase_eval(spec, v(2, 0), v(1, 0)) == pytest.approx(-2.0)

    def test_mp_is_minus_two_xi_dot_eta(self):
        spec = PhaseSpec.from_label("-+")
        rng = np.random.default_rng(0)
        for _ in range(20):
            xi, eta = rng.standard_normal(2), rng.standard_normal(2)
            assert phase_eval(spec, xi, eta) == pytest.approx(-2.0 * float(xi @ eta))

    def test_cubic_matches_definition(self):
        spec = PhaseSpec.from_label("-++")
        xi, eta, sigma = v(1, 2), v(0.5, -1), v(0.25, 0.75)
        expected = (-np.sum(xi**2) - np.sum((xi - eta) ** 2)
                    + np.sum((eta - sigma) ** 2) + np.sum(sigma**2))
        assert phase_eval(spec, xi, eta, sigma) == pytest.approx(expected)

    def test_rejects_unknown_pattern(self):
        with pytest.raises(ConfigurationError):
            PhaseSpec(signs=(1, 1, -1))


class TestPhaseGrad:
    def test_pp_space_resonance(self):
        spec = PhaseSpec.from_label("++")
        g = phase_grad(spec, "eta", v(2, 0), v(1, 0))
        assert np.allclose(g, 0.0)

    def test_mp_gradient_constant_in_eta(self):
        spec = PhaseSpec.from_label("-+")
        rng = np.random.default_rng(1)
        for _ in range(10):
            xi, eta = rng.standard_normal(2), rng.standard_normal(2)
            # phi_-+ = -2 xi . eta from the defining quadratic form
            assert np.allclose(phase_grad(spec, "eta", xi, eta), -2.0 * xi)

    def test_cubic_space_resonance_point(self):
        spec = PhaseSpec.from_label("+++")
        sigma = v(1.0, -0.5)
        g = phase_grad(spec, "eta,sigma", 3 * sigma, 2 * sigma, sigma)
        assert np.allclose(g, 0.0, atol=1e-14)

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        spec = ALL_PHASES[seed % len(ALL_PHASES)]
        p = rng.standard_normal(spec.dim)
        g = phase_grad(spec, "all", p)
        h = 1e-6
        fd = np.zeros(spec.dim)
        for i in range(spec.dim):
            e = np.zeros(spec.dim)
            e[i] = h
            fd[i] = (phase_eval(spec, p + e) - phase_eval(spec, p - e)) / (2 * h)
        assert np.max(np.abs(g - fd)) <= 1e-8 * max(1.0, np.max(np.abs(g)))


class TestNullIdentity:
    def test_specific_points(self):
        assert np.allclose(check_null_identity(v(0, 0), v(0, 0), v(0, 0)), 0.0)
        assert np.allclose(check_null_identity(v(1, 0), v(2, 0), v(1, 0)), 0.0)

    def test_random_cloud_machine_precision(self):
        rng = np.random.default_rng(42)
        xi = rng.standard_normal((10_000, 2)) * 5
        eta = rng.standard_normal((10_000, 2)) * 5
        sigma = rng.standard_normal((10_000, 2)) * 5
        res = check_null_identity(xi, eta, sigma)
        assert np.max(np.abs(res)) <= 1e-12


class TestIbpIdentity:
    @given(seed=st.integers(0, 10**6), s=st.floats(0.5, 50.0))
    @settings(max_examples=25, deadline=None)
    def test_residual_zero_off_space_resonance(self, seed, s):
        rng = np.random.default_rng(seed)
        for label in ("++", "+++"):
            spec = PhaseSpec.from_label(label)
            p = rng.standard_normal((8, spec.dim))
            grad = np.linalg.norm(p @ spec.grad_matrix.T, axis=-1)
            p = p[grad > 0.3]
            res = ibp_residual(spec, s, p)
            assert np.max(np.abs(res)) <= 1e-12


class TestClosedFormSets:
    def test_space_set_kernels(self):
        # S_++ = {xi = 2 eta}
        s = space_set(PhaseSpec.from_label("++"))
        assert s.distance(np.array([2.0, 4.0, 1.0, 2.0])) == pytest.approx(0.0, abs=1e-12)
        assert s.distance(np.array([1.0, 0, 0, 0])) > 0.1
        # S_+++ = {xi = 3 sigma = 3/2 eta}
        s3 = space_set(PhaseSpec.from_label("+++"))
        assert s3.distance(np.array([3.0, 0, 2.0, 0, 1.0, 0])) == pytest.approx(0.0, abs=1e-12)

    def test_spacetime_sets(self):
        r = spacetime_set(PhaseSpec.from_label("-+"))
        assert r.distance(np.array([0, 0, 3.0, -1.0])) == pytest.approx(0.0, abs=1e-12)
        assert r.distance(np.array([1.0, 0, 0, 0])) == pytest.approx(1.0)
        r3 = spacetime_set(PhaseSpec.from_label("-++"))
        assert r3.distance(np.array([0.5, 0, 1.0, 0, 0.5, 0])) == pytest.approx(0.0, abs=1e-12)

    def test_time_sample_lies_on_zero_set(self):
        for label in ("++", "-+", "+-", "+++", "+--", "-++"):
            spec = PhaseSpec.from_label(label)
            pts = time_set_sample(spec, 3.0, 0.5)
            assert len(pts) > 0
            vals = np.abs(phase_eval(spec, pts))
            assert np.max(vals) <= 1e-9


class TestResonantSets:
    def test_pp_r_cloud_is_origin_cell(self):
        spec = PhaseSpec.from_label("++")
        out = resonant_sets(spec, box_radius=4.0, points_per_axis=33)
        assert len(out.r_points) >= 1
        assert np.max(np.linalg.norm(out.r_points, axis=1)) <= out.spacing * np.sqrt(4.0)

    def test_mp_r_cloud_fills_xi_zero_plane(self):
        spec = PhaseSpec.from_label("-+")
        out = resonant_sets(spec, box_radius=4.0, points_per_axis=33)
        pts = out.r_points
        # every detected point sits on {xi = 0}
        assert np.max(np.abs(pts[:, :2])) <= out.spacing * 1e-3
        # and the eta plane is filled at lattice density
        assert len(pts) >= 33**2

    def test_mpp_r_cloud_on_line(self):
        spec = PhaseSpec.from_label("-++")
        out = resonant_sets(spec, box_radius=2.0, points_per_axis=17)
        rset = spacetime_set(spec)
        dists = rset.distance(out.r_points)
        assert np.max(dists) <= out.spacing
        assert len(out.r_points) >= 3

    def test_coverage_tolerance_covers_t_cloud(self):
        spec = PhaseSpec.from_label("++")
        tol = coverage_tolerance(spec, 8.0 / 32)
        out = resonant_sets(spec, box_radius=4.0, points_per_axis=33, tol=tol)
        sample = time_set_sample(spec, 4.0, 0.25)
        tree = cKDTree(out.t_points)
        d, _ = tree.query(sample, k=1)
        assert np.max(d) <= out.spacing * np.sqrt(4.0)


class TestCutoffs:
    @pytest.mark.parametrize("label", ["++", "--", "+++", "+--", "---"])
    @pytest.mark.parametrize("t", [1.0, 4.0, 16.0])
    def test_partition_of_unity(self, label, t):
        spec = PhaseSpec.from_label(label)
        fam = build_cutoffs(spec, t)
        rng = np.random.default_rng(3)
        pts = rng.uniform(-5, 5, size=(4096, spec.dim))
        total = fam.chi_r(pts) + fam.chi_s(pts) + fam.chi_t(pts)
        assert np.max(np.abs(total - 1.0)) <= 1e-12
        for part in (fam.chi_r(pts), fam.chi_s(pts), fam.chi_t(pts)):
            assert np.min(part) >= 0.0 and np.max(part) <= 1.0 + 1e-12

    def test_chi_r_ball_structure(self):
        spec = PhaseSpec.from_label("++")
        fam = build_cutoffs(spec, 1.0)
        rng = np.random.default_rng(5)
        dirs = rng.standard_normal((64, 4))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        assert np.all(fam.chi_r(0.9 * dirs) == 1.0)
        assert np.all(fam.chi_r(2.1 * dirs) == 0.0)

    def test_minus_minus_has_no_s(self):
        for label in ("--", "---"):
            spec = PhaseSpec.from_label(label)
            fam = build_cutoffs(spec, 7.0)
            pts = np.random.default_rng(6).uniform(-4, 4, size=(512, spec.dim))
            assert np.all(fam.chi_s(pts) == 0.0)

    def test_dilation_identity_exact(self):
        spec = PhaseSpec.from_label("++")
        fam16 = build_cutoffs(spec, 16.0)
        fam1 = build_cutoffs(spec, 1.0)
        pts = np.random.default_rng(7).uniform(-3, 3, size=(512, 4))
        assert np.array_equal(fam16.chi_t(pts), fam1.chi_t(4.0 * pts))
        assert np.array_equal(fam16.chi_s(pts), fam1.chi_s(4.0 * pts))
        assert np.array_equal(fam16.chi_r(pts), fam1.chi_r(4.0 * pts))

    def test_chi_t_vanishes_near_time_resonance(self):
        spec = PhaseSpec.from_label("++")
        fam = build_cutoffs(spec, 1.0)
        pts = time_set_sample(spec, 3.0, 0.3)
        assert np.max(fam.chi_t(pts)) == 0.0

    def test_chi_s_vanishes_near_space_resonance(self):
        spec = PhaseSpec.from_label("++")
        fam = build_cutoffs(spec, 1.0)
        sset = space_set(spec)
        pts = sset.sample(3.0, 0.3)
        assert np.max(fam.chi_s(pts)) == 0.0

    def test_unpartitionable_phase_rejected(self):
        with pytest.raises(ConfigurationError):
            build_cutoffs(PhaseSpec.from_label("-+"), 1.0)

    def test_oversized_widths_raise_coverage_error(self):
        with pytest.raises(CoverageError, match="build_cutoffs"):
            build_cutoffs(PhaseSpec.from_label("++"), 1.0, delta_t=0.45, delta_s=0.45)

    def test_time_derivative_support_and_fd(self):
        spec = PhaseSpec.from_label("++")
        t = 4.0
        fam = build_cutoffs(spec, t)
        rng = np.random.default_rng(11)
        pts = rng.uniform(-2, 2, size=(2048, 4))
        dchi = fam.chi_t_time_derivative(pts)
        r = np.linalg.norm(pts, axis=-1)
        # supported exactly in the dilated transition annulus
        assert np.all(dchi[(r < 1.0 / np.sqrt(t)) | (r > 2.0 / np.sqrt(t))] == 0.0)
        h = 1e-5
        fd = (build_cutoffs(spec, t + h).chi_t(pts) - build_cutoffs(spec, t - h).chi_t(pts)) / (2 * h)
        assert np.max(np.abs(fd - dchi)) <= 1e-6


class TestSupportBounds:
    def test_pp_bounds_positive_with_expected_growth(self):
        spec = PhaseSpec.from_label("++")
        fam = build_cutoffs(spec, 1.0)
        rng = np.random.default_rng(23)
        pts = rng.uniform(-20, 20, size=(200_000, 4))
        out = support_lower_bounds(fam, pts)
        assert out.min_phase_on_t > 0
        assert out.min_grad_on_s is not None and out.min_grad_on_s > 0
        assert out.phase_exponent == pytest.approx(2.0, abs=0.4)
        assert out.grad_exponent == pytest.approx(1.0, abs=0.4)

    def test_points_in_chi_r_only_are_excluded(self):
        spec = PhaseSpec.from_label("++")
        fam = build_cutoffs(spec, 1.0)
        inner = np.random.default_rng(2).uniform(-0.4, 0.4, size=(64, 4))
        outer = np.random.default_rng(3).uniform(5, 9, size=(512, 4))
        both = np.concatenate([inner, outer])
        out = support_lower_bounds(fam, both)
        # the inner points carry chi_r = 1 and must not drag the minima to zero
        assert out.min_phase_on_t > 0.1


class TestNeighborhoodCutoff:
    def test_one_near_line_zero_far(self):
        spec = PhaseSpec.from_label("-++")
        chi = neighborhood_cutoff(spec, width=0.2)
        sigma = np.array([1.0, 0.0])
        on_line = np.concatenate([sigma, 2 * sigma, sigma])
        assert chi(on_line) == pytest.approx(1.0)
        far = np.array([3.0, 0, 0, 0, 0, 0])
        assert chi(far) == pytest.approx(0.0)
