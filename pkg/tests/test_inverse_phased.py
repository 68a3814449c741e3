"""Phased reconstruction building blocks and full loop."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aescatter.forward import IncidentWave, far_field, gamma_far, solve_forward
from aescatter.geometry import NodeGrid, jet, make_apple, make_fourier
from aescatter.inverse_phased import (
    BoundaryUpdate,
    InverseConfig,
    add_noise_phased,
    apply_update,
    boundary_error,
    frechet_columns,
    initial_curve,
    noise_samples,
    run_phased,
    tikhonov_step,
    trapezoid_norm,
)

OBS = np.pi * np.arange(128) / 64
M = 6


@pytest.fixture(scope="module")
def apple_far_field(params, wave):
    curve = make_apple()
    grid = NodeGrid(64)
    dens = solve_forward(curve, params, wave, grid)
    return curve, dens, far_field(dens, curve, params, OBS, grid), grid


class TestNorms:
    def test_trapezoid_norm_of_cosine(self):
        # ||cos||_{L^2(0,2pi)} = sqrt(pi); the periodic trapezoid rule is
        # exact for the squared cosine.
        t = 2 * np.pi * np.arange(64) / 64
        assert trapezoid_norm(np.cos(t)) == pytest.approx(np.sqrt(np.pi), abs=1e-12)

    def test_boundary_error_identity_and_scale(self):
        from aescatter.geometry import make_circle

        c1 = make_circle((0, 0), 1.0)
        assert boundary_error(c1, c1) == 0.0
        c2 = make_circle((0, 0), 1.1)
        assert boundary_error(c2, c1) == pytest.approx(0.1, abs=1e-12)


class TestNoise:
    def test_zero_delta_identity(self, apple_far_field):
        _, _, ff, _ = apple_far_field
        out = add_noise_phased(ff, 0.0, seed=1)
        np.testing.assert_array_equal(out.values, ff.values)

    def test_relative_bound(self, apple_far_field):
        _, _, ff, _ = apple_far_field
        out = add_noise_phased(ff, 0.01, seed=2)
        rel = np.abs(out.values - ff.values) / np.abs(ff.values)
        assert rel.max() <= 0.01 * np.sqrt(2.0) + 1e-15

    def test_reproducible(self, apple_far_field):
        _, _, ff, _ = apple_far_field
        a = add_noise_phased(ff, 0.05, seed=9)
        b = add_noise_phased(ff, 0.05, seed=9)
        np.testing.assert_array_equal(a.values, b.values)

    def test_negative_delta_rejected(self, apple_far_field):
        _, _, ff, _ = apple_far_field
        with pytest.raises(ValueError):
            add_noise_phased(ff, -0.1, seed=0)

    @pytest.mark.parametrize("model", ["uniform", "truncated-normal"])
    def test_samples_in_range(self, model):
        rng = np.random.default_rng(0)
        s = noise_samples(rng, 10_000, model)
        assert np.all(np.abs(s) <= 1.0)

    def test_unknown_model_rejected(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            noise_samples(rng, 10, "gaussian")


class TestFrechetColumns:
    def test_zero_density_zero_matrix(self, params, apple_far_field):
        curve, dens, _, grid = apple_far_field
        zero = type(dens)(np.zeros_like(dens.phi1_tilde),
                          np.zeros_like(dens.phi2_tilde),
                          np.zeros_like(dens.phi3_tilde))
        B = frechet_columns(curve, zero, params, OBS, M, grid)
        assert np.abs(B).max() == 0.0

    def test_center_column_structure(self, params, apple_far_field):
        # the first column is -i kappa_a cos(t) times the far-field sum with
        # the same frozen density
        curve, dens, ff, grid = apple_far_field
        B = frechet_columns(curve, dens, params, OBS, M, grid)
        expected = -1j * params.kappa_a * np.cos(OBS) * ff.values
        np.testing.assert_allclose(B[:, 0], expected, atol=1e-12)
        expected1 = -1j * params.kappa_a * np.sin(OBS) * ff.values
        np.testing.assert_allclose(B[:, 1], expected1, atol=1e-12)

    def _frozen_far_field(self, curve, dens, params, grid, update, sign):
        """Far-field quadrature with frozen density on the perturbed curve."""
        t = grid.nodes
        vartheta = dens.phi3_tilde * jet(curve, t).G ** 2
        p = curve.point(t) + sign * update.delta_c \
            + (sign * update.delta_r(t))[:, None] \
            * np.column_stack([np.cos(t), np.sin(t)])
        ka = params.kappa_a
        phase = np.exp(-1j * ka * (np.cos(OBS)[:, None] * p[:, 0]
                                   + np.sin(OBS)[:, None] * p[:, 1]))
        return gamma_far(ka) * (np.pi / grid.n) * phase @ vartheta

    def test_directional_finite_differences(self, params, apple_far_field):
        curve, dens, _, grid = apple_far_field
        B = frechet_columns(curve, dens, params, OBS, M, grid)
        rng = np.random.default_rng(5)
        eps = 1e-5
        for _ in range(5):
            xi = rng.standard_normal(2 * M + 3)
            xi /= np.linalg.norm(xi)
            upd = BoundaryUpdate(eps * xi[:2], eps * xi[2:3 + M], eps * xi[3 + M:])
            fd = (self._frozen_far_field(curve, dens, params, grid, upd, 1.0)
                  - self._frozen_far_field(curve, dens, params, grid, upd, -1.0)) \
                / (2.0 * eps)
            pred = B @ xi
            assert np.abs(fd - pred).max() / np.abs(fd).max() < 1e-4


class TestTikhonovStep:
    def make_system(self, seed=3):
        rng = np.random.default_rng(seed)
        B = rng.standard_normal((40, 2 * M + 3)) + 1j * rng.standard_normal((40, 2 * M + 3))
        w = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        return B, w

    def test_zero_residual_zero_step(self):
        B, _ = self.make_system()
        upd = tikhonov_step(B, np.zeros(40, complex), 1.0, M, 0.9)
        assert np.abs(upd.xi).max() == 0.0

    def test_large_lambda_shrinks_step(self):
        B, w = self.make_system()
        big = tikhonov_step(B, w, 1e9, M, 1.0)
        bound = np.abs((B.conj().T @ w).real).max() / 1e9
        assert np.abs(big.xi).max() <= bound * 2

    def test_normal_equations_satisfied(self):
        from aescatter.inverse_phased import _penalty_diag

        B, w = self.make_system()
        lam = 0.7
        upd = tikhonov_step(B, w, lam, M, 1.0)
        lhs = lam * np.diag(_penalty_diag(M)) + (B.conj().T @ B).real
        res = lhs @ upd.xi - (B.conj().T @ w).real
        assert np.abs(res).max() < 1e-10

    def test_minimizes_penalized_least_squares(self):
        from aescatter.inverse_phased import _penalty_diag

        B, w = self.make_system()
        lam = 0.7
        xi = tikhonov_step(B, w, lam, M, 1.0).xi
        P = np.diag(_penalty_diag(M))

        def objective(x):
            return np.linalg.norm(B @ x - w) ** 2 + lam * x @ P @ x

        base = objective(xi)
        for i in range(len(xi)):
            for s in (+1e-6, -1e-6):
                pert = xi.copy()
                pert[i] += s
                assert objective(pert) >= base - 1e-12

    def test_negative_lambda_rejected(self):
        B, w = self.make_system()
        with pytest.raises(ValueError):
            tikhonov_step(B, w, -1.0, M, 0.9)


class TestUpdates:
    def test_apply_update_center_and_radius(self):
        curve = make_fourier((0.0, 0.0), [1.0, 0.0], [0.0])
        upd = BoundaryUpdate(np.array([0.1, -0.2]),
                             np.array([0.05, 0.01]), np.array([0.02]))
        new = apply_update(curve, upd)
        np.testing.assert_allclose(new.center, [0.1, -0.2], atol=1e-15)
        t = np.array([0.0, 1.0, 2.5])
        np.testing.assert_allclose(
            new.radial.radius(t),
            1.05 + 0.01 * np.cos(t) + 0.02 * np.sin(t), atol=1e-15)

    def test_apply_update_pads_coefficients(self):
        curve = make_fourier((0.0, 0.0), [1.0, 0.1], [0.05])
        upd = BoundaryUpdate(np.zeros(2), np.zeros(4), np.zeros(3))
        new = apply_update(curve, upd)
        assert len(new.radial.a) == 4

    def test_pinching_update_raises(self):
        curve = make_fourier((0.0, 0.0), [0.5, 0.0], [0.0])
        upd = BoundaryUpdate(np.zeros(2), np.array([-0.6, 0.0]), np.array([0.0]))
        with pytest.raises(ValueError, match="positive"):
            apply_update(curve, upd)

    def test_scaled(self):
        upd = BoundaryUpdate(np.array([1.0, 2.0]), np.array([3.0, 4.0]),
                             np.array([5.0]))
        np.testing.assert_allclose(upd.scaled(0.5).xi, 0.5 * upd.xi, atol=1e-15)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
    def test_delta_r_matches_series(self, a1, b1):
        upd = BoundaryUpdate(np.zeros(2), np.array([0.0, a1]), np.array([b1]))
        t = np.linspace(0, 2 * np.pi, 7)
        np.testing.assert_allclose(upd.delta_r(t),
                                   a1 * np.cos(t) + b1 * np.sin(t), atol=1e-12)


class TestConfig:
    def test_validation(self):
        kw = dict(initial_center=(0, 0), initial_radius=0.5, epsilon=0.1)
        with pytest.raises(ValueError):
            InverseConfig(**kw, M=0)
        with pytest.raises(ValueError):
            InverseConfig(**kw, rho=0.0)
        with pytest.raises(ValueError):
            InverseConfig(**kw, noise_model="bogus")
        with pytest.raises(ValueError):
            InverseConfig(initial_center=(0, 0), initial_radius=0.5, epsilon=-1.0)

    def test_initial_curve_is_circle(self):
        cfg = InverseConfig(initial_center=(0.2, -0.1), initial_radius=0.4,
                            epsilon=0.1)
        curve = initial_curve(cfg)
        t = np.linspace(0, 2 * np.pi, 9)
        np.testing.assert_allclose(curve.radial.radius(t), 0.4, atol=1e-15)
        np.testing.assert_allclose(curve.center, [0.2, -0.1], atol=1e-15)


class TestRunPhased:
    def test_fixed_point_exit(self, params, wave):
        # data generated from the initial guess: E_0 = 0, immediate exit
        cfg = InverseConfig(initial_center=(0.1, 0.0), initial_radius=0.5,
                            epsilon=0.05)
        guess = initial_curve(cfg)
        grid = NodeGrid(64)
        dens = solve_forward(guess, params, wave, grid)
        ff = far_field(dens, guess, params, OBS, grid)
        records = run_phased(ff, params, wave, cfg)
        assert len(records) == 1
        assert records[0].E_k < 1e-10

    def test_truth_start_does_not_move(self, params, wave):
        # noise-free data with the exact boundary as the initial guess:
        # the Fourier guess cannot represent the apple exactly, so compare
        # on a representable target instead
        target = make_fourier((0.05, -0.02), [0.6, 0.1, 0.02], [0.03, 0.0])
        grid = NodeGrid(64)
        dens = solve_forward(target, params, wave, grid)
        ff = far_field(dens, target, params, OBS, grid)
        cfg = InverseConfig(initial_center=(0.05, -0.02), initial_radius=0.6,
                            epsilon=1e-12, M=2, max_iter=3)
        records = run_phased(ff, params, wave, cfg, ground_truth=target)
        # started on a curve differing only in two small modes; the loop
        # must not blow up and E must not increase from its small start
        assert records[-1].E_k <= records[0].E_k + 1e-12

    def test_peanut_high_noise_breakdown_documented(self, params):
        """At 5% noise from a poor guess the fixed-step iteration is known
        to oscillate until the forward solve breaks down or the curve
        pinches; this pins the observed failure mode (see project notes)."""
        from aescatter.geometry import make_peanut

        truth = make_peanut()
        wave13 = IncidentWave(13 * np.pi / 8)
        grid = NodeGrid(100)
        dens = solve_forward(truth, params, wave13, grid)
        ff = far_field(dens, truth, params, OBS, grid)
        noisy = add_noise_phased(ff, 0.05, seed=3)
        cfg = InverseConfig(initial_center=(-0.67, -0.12), initial_radius=0.4,
                            epsilon=0.25)
        with pytest.raises((ValueError, FloatingPointError)):
            run_phased(noisy, params, wave13, cfg, ground_truth=truth)

    def test_err_column_none_without_truth(self, params, wave):
        cfg = InverseConfig(initial_center=(0.0, 0.0), initial_radius=0.5,
                            epsilon=10.0)
        guess = initial_curve(cfg)
        grid = NodeGrid(64)
        dens = solve_forward(guess, params, wave, grid)
        ff = far_field(dens, guess, params, OBS, grid)
        records = run_phased(ff, params, wave, cfg)
        assert records[0].Err_k is None
