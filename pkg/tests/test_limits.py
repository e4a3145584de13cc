"""Tests for limit processes, the pathwise residual, and rescalings."""

import math

import numpy as np
import pytest

from levylangevin import (
    JumpPath,
    LimitRegime,
    RegimeError,
    SystemParams,
    TruncatedStable,
    filtered_tail_mass,
    limit_filtered_sum,
    limit_log_signs,
    limit_power_gaps,
    pathwise_residual,
    power_scaling_exponent,
    rescale_to_unit_friction,
    response,
    sample_jump_events,
    solve_exact,
    stable_filter_params,
    tail_mass,
)


class TestFilteredSum:
    def test_two_jump_example(self):
        noise = JumpPath(1.0, np.array([0.5, 0.8]), np.array([1.0, -2.0]))
        path = limit_filtered_sum(noise, 0.0, 0.0, 0.0, [1.0])
        assert path.values[0] == pytest.approx(-1.5, rel=1e-15)
        assert path.regime is LimitRegime.FILTERED_SUM
        assert path.scaling == "identity"

    def test_only_earlier_jumps_counted(self):
        noise = JumpPath(1.0, np.array([0.5, 0.8]), np.array([1.0, -2.0]))
        path = limit_filtered_sum(noise, 0.0, 0.0, 0.0, [0.6])
        assert path.values[0] == pytest.approx(0.5, rel=1e-15)

    def test_empty_noise_gives_initial_response(self):
        noise = JumpPath(1.0, np.empty(0), np.empty(0))
        path = limit_filtered_sum(noise, 1.0, 2.0, 0.5, [0.3, 0.7, 1.0])
        expected = 1.0 + response(2.0, 0.5)
        assert np.all(path.values == expected)

    def test_odd_under_global_sign_flip(self):
        taus = np.array([0.2, 0.6])
        jumps = np.array([1.3, -0.4])
        grid = [0.1, 0.5, 1.0]
        a = limit_filtered_sum(JumpPath(1.0, taus, jumps), 0.0, 0.7, 0.5, grid)
        b = limit_filtered_sum(JumpPath(1.0, taus, -jumps), 0.0, -0.7, 0.5, grid)
        np.testing.assert_array_equal(a.values, -b.values)

    def test_increments_depend_only_on_window_jumps(self):
        noise = JumpPath(2.0, np.array([0.3, 0.9, 1.4]), np.array([1.0, -0.5, 2.0]))
        path = limit_filtered_sum(noise, 5.0, 1.0, 0.3, [0.5, 1.0, 2.0])
        inc = np.diff(path.values)
        assert inc[0] == pytest.approx(response(-0.5, 0.3), rel=1e-12)
        assert inc[1] == pytest.approx(response(2.0, 0.3), rel=1e-12)

    def test_rejects_beta_at_or_above_two(self):
        noise = JumpPath(1.0, np.empty(0), np.empty(0))
        with pytest.raises(RegimeError):
            limit_filtered_sum(noise, 0.0, 0.0, 2.0, [1.0])


class TestLogSigns:
    def test_mixed_signs(self):
        noise = JumpPath(1.0, np.array([0.2, 0.5]), np.array([0.4, -1.7]))
        assert limit_log_signs(noise, 1.0, [0.9]).values[0] == 1.0

    def test_zero_start_no_jumps(self):
        noise = JumpPath(1.0, np.empty(0), np.empty(0))
        assert limit_log_signs(noise, 0.0, [1.0]).values[0] == 0.0

    def test_negative_start_three_positive_jumps(self):
        noise = JumpPath(1.0, np.array([0.1, 0.4, 0.6]), np.array([1.0, 1.0, 1.0]))
        assert limit_log_signs(noise, -2.0, [0.8]).values[0] == 2.0


class TestPowerGaps:
    def test_no_jump_square_root(self):
        noise = JumpPath(1.0, np.empty(0), np.empty(0))
        value = limit_power_gaps(noise, 1.0, 3.0, 1.0)
        assert value == pytest.approx(math.sqrt(2.0), rel=1e-14)

    def test_zero_start_gives_zero(self):
        noise = JumpPath(1.0, np.empty(0), np.empty(0))
        assert limit_power_gaps(noise, 0.0, 3.0, 1.0) == 0.0

    def test_cancelling_jump(self):
        noise = JumpPath(1.0, np.array([0.5]), np.array([-1.0]))
        assert limit_power_gaps(noise, 1.0, 3.0, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_matches_scaled_exact_solver(self):
        noise = JumpPath(1.0, np.array([0.25, 0.5, 0.75]), np.array([1.0, 0.8, 1.2]))
        eps = 1e-6
        q = power_scaling_exponent(3.0)
        exact = solve_exact(noise, SystemParams(3.0, eps, 0.0, 1.0), np.array([1.0]))
        limit = limit_power_gaps(noise, 1.0, 3.0, 1.0)
        assert eps**q * exact.X[0] == pytest.approx(limit, rel=1e-2)

    def test_rejects_beta_at_or_below_two(self):
        noise = JumpPath(1.0, np.empty(0), np.empty(0))
        with pytest.raises(RegimeError):
            limit_power_gaps(noise, 1.0, 2.0, 1.0)


class TestPathwiseResidual:
    def test_rest_state_zero(self):
        noise = JumpPath(1.0, np.empty(0), np.empty(0))
        assert pathwise_residual(noise, SystemParams(0.5, 0.1), 1.0) == 0.0

    def test_single_completed_response(self):
        noise = JumpPath(1.0, np.array([0.5]), np.array([1.0]))
        r = pathwise_residual(noise, SystemParams(0.0, 1e-3), 1.0)
        assert abs(r) < 1e-2

    def test_decreases_on_fixed_noise_as_eps_shrinks(self):
        rng = np.random.default_rng(1)
        taus = np.sort(rng.uniform(0.1, 0.9, 5))
        jumps = rng.uniform(0.4, 1.2, 5) * rng.choice([-1.0, 1.0], 5)
        noise = JumpPath(1.0, taus, jumps)
        for beta in (0.0, 0.5, 1.5):
            residuals = [
                abs(pathwise_residual(noise, SystemParams(beta, eps, 0.2, 0.4), 1.0))
                for eps in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
            ]
            for a, b in zip(residuals, residuals[1:]):
                assert b < a or b < 1e-9, f"beta={beta}: {residuals}"

    def test_rejects_beta_at_or_above_two(self):
        noise = JumpPath(1.0, np.empty(0), np.empty(0))
        with pytest.raises(RegimeError):
            pathwise_residual(noise, SystemParams(2.0, 0.1), 1.0)


class TestRescaleToUnitFriction:
    def test_gamma_one_scalings(self):
        noise = JumpPath(1.0, np.array([0.3, 0.7]), np.array([0.9, -1.4]))
        params = SystemParams(beta=0.5, eps=1e-2, x0=0.0, v0=0.5)
        grid = np.array([0.25, 0.5, 1.0])
        traj = solve_exact(noise, params, grid)
        rescaled = rescale_to_unit_friction(traj, alpha=1.5)
        # alpha + beta - 1 = 1, so gamma = 1
        np.testing.assert_allclose(rescaled.t_grid, grid * 1e-2 ** (-1.5), rtol=1e-15)
        np.testing.assert_allclose(rescaled.V, traj.V / 1e-2, rtol=1e-15)

    def test_identity_check_reproduces_position(self):
        rng = np.random.default_rng(5)
        for beta, alpha in ((0.5, 1.5), (1.2, 1.1), (0.0, 1.8), (1.5, 0.7)):
            taus = np.sort(rng.uniform(0.05, 0.95, 6))
            jumps = rng.uniform(0.3, 1.0, 6) * rng.choice([-1.0, 1.0], 6)
            noise = JumpPath(1.0, taus, jumps)
            params = SystemParams(beta=beta, eps=0.05, x0=0.7, v0=-0.4)
            grid = np.array([0.2, 0.5, 1.0])
            traj = solve_exact(noise, params, grid)
            rescaled = rescale_to_unit_friction(traj, alpha=alpha)
            np.testing.assert_allclose(rescaled.X, traj.X, rtol=1e-9)

    def test_unit_eps_is_identity(self):
        noise = JumpPath(1.0, np.array([0.4]), np.array([1.0]))
        params = SystemParams(beta=0.5, eps=1.0, x0=0.0, v0=0.3)
        grid = np.array([0.5, 1.0])
        traj = solve_exact(noise, params, grid)
        rescaled = rescale_to_unit_friction(traj, alpha=1.2)
        np.testing.assert_array_equal(rescaled.t_grid, traj.t_grid)
        np.testing.assert_array_equal(rescaled.V, traj.V)
        np.testing.assert_array_equal(rescaled.X, traj.X)

    def test_rejects_degenerate_exponent(self):
        noise = JumpPath(1.0, np.empty(0), np.empty(0))
        traj = solve_exact(noise, SystemParams(0.2, 0.5), np.array([1.0]))
        with pytest.raises(RegimeError):
            rescale_to_unit_friction(traj, alpha=0.5)


class TestStableFilterParams:
    def test_reference_point(self):
        alpha_x, c_x = stable_filter_params(1.2, 0.4, 1.0)
        assert alpha_x == pytest.approx(0.75, rel=1e-15)
        assert c_x == pytest.approx(1.6 ** (-2.2), rel=1e-12)

    def test_linear_friction_fixed_point(self):
        alpha_x, c_x = stable_filter_params(1.0, 1.0, 3.7)
        assert alpha_x == pytest.approx(1.0, rel=1e-15)
        assert c_x == pytest.approx(3.7, rel=1e-15)

    def test_dry_friction(self):
        alpha_x, c_x = stable_filter_params(1.0, 0.0, 1.0)
        assert alpha_x == pytest.approx(0.5, rel=1e-15)
        assert c_x == pytest.approx(0.25, rel=1e-15)

    def test_rejects_clt_regime(self):
        with pytest.raises(RegimeError):
            stable_filter_params(1.2, 1.5, 1.0)

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            stable_filter_params(2.0, 0.0, 1.0)


class TestFilteredTailMass:
    def test_image_tail_matches_sampled_responses(self):
        # fraction of |response(J)| above u == image-measure tail / total mass
        model = TruncatedStable(alpha=1.2, c=1.0, ell=1e-3)
        path = sample_jump_events(model, 5.0, 4242)
        beta = 0.4
        resp = np.abs(path.amplitudes) ** (2.0 - beta) / (2.0 - beta)
        n = resp.size
        assert n > 20_000
        lam = tail_mass(model, model.ell)
        floor = response(model.ell, beta)
        for u in (4 * floor, 20 * floor, 100 * floor):
            frac = np.mean(resp > u)
            expected = filtered_tail_mass(model, beta, u) / lam
            se = math.sqrt(expected * (1 - expected) / n)
            assert abs(frac - expected) < 3 * se, f"u={u}: {frac} vs {expected}"

    def test_monotone_in_threshold(self):
        model = TruncatedStable(alpha=1.0, c=1.0, ell=0.01)
        vals = [filtered_tail_mass(model, 0.5, u) for u in (0.01, 0.1, 1.0)]
        assert vals[0] >= vals[1] >= vals[2]


class TestScalingRegimeConvergence:
    def test_log_scaled_solution_approaches_sign_count(self):
        noise = JumpPath(1.0, np.array([0.25, 0.5, 0.75]), np.array([1.0, 0.8, 1.2]))
        lim = limit_log_signs(noise, 1.0, [1.0]).values[0]
        errors = []
        for eps in (1e-2, 1e-4, 1e-6):
            x = solve_exact(noise, SystemParams(2.0, eps, 0.0, 1.0), np.array([1.0])).X[0]
            errors.append(abs(x / math.log(1.0 / eps) - lim) / abs(lim))
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 0.20
