import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from massart.losses import empirical_hinge
from massart.solver import SolverOptions, minimize_hinge_in_ball, project_to_ball
from oracles import cvxpy_minimum, polar_grid_minimum, random_solver_instance

KAPPA = SolverOptions().suboptimality
vec3 = arrays(float, 3, elements=st.floats(-10, 10, allow_nan=False))


class TestProjection:
    def test_inside_unchanged(self):
        v = np.array([0.1, 0.2])
        np.testing.assert_array_equal(project_to_ball(v, np.zeros(2), 1.0), v)

    def test_double_distance_halves(self):
        c = np.array([1.0, -1.0])
        out = project_to_ball(c + np.array([0.0, 2.0]), c, 1.0)
        assert np.linalg.norm(out - c) == pytest.approx(1.0)

    @given(vec3, vec3, st.floats(0.01, 5))
    @settings(max_examples=200, deadline=None)
    def test_idempotent(self, v, c, r):
        p = project_to_ball(v, c, r)
        assert np.linalg.norm(p - c) <= r * (1 + 1e-12)
        np.testing.assert_allclose(project_to_ball(p, c, r), p, atol=1e-12)

    @given(vec3, vec3, vec3, st.floats(0.01, 5))
    @settings(max_examples=200, deadline=None)
    def test_non_expansive(self, u, v, c, r):
        pu, pv = project_to_ball(u, c, r), project_to_ball(v, c, r)
        assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-9


class TestMinimize:
    def test_separable_at_center(self):
        rng = np.random.default_rng(0)
        center = np.array([1.0, 0.0, 0.0])
        tau, radius = 0.1, 0.2
        X = rng.normal(size=(200, 3))
        X[:, 0] = np.where(X[:, 0] >= 0, 1, -1) * rng.uniform(0.5, 0.9, 200)
        X /= np.maximum(1.0, np.linalg.norm(X, axis=1))[:, None]
        # margins at the center are >= tau * (1 + radius) for every point
        X = X[np.abs(X[:, 0]) >= tau * (1 + radius)]
        y = np.sign(X[:, 0])
        sol = minimize_hinge_in_ball(X, y, tau, center, radius)
        assert sol.achieved == 0.0
        np.testing.assert_array_equal(sol.v, center)
        assert sol.converged

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_polar_grid(self, seed):
        X, y, tau, center, radius = random_solver_instance(np.random.default_rng(seed))
        sol = minimize_hinge_in_ball(X, y, tau, center, radius)
        grid, _ = polar_grid_minimum(X, y, tau, center, radius, 600, 600)
        assert sol.achieved <= grid + KAPPA
        assert np.linalg.norm(sol.v - center) <= radius + 1e-9

    @pytest.mark.parametrize("d,m,seed", [(3, 100, 0), (5, 300, 1), (10, 500, 2), (25, 800, 3)])
    def test_matches_conic_solver(self, d, m, seed):
        X, y, tau, center, radius = random_solver_instance(np.random.default_rng(seed), d, m)
        sol = minimize_hinge_in_ball(X, y, tau, center, radius)
        ref, _ = cvxpy_minimum(X, y, tau, center, radius)
        assert sol.achieved <= ref + 1e-5
        assert sol.achieved >= ref - 1e-6
        assert sol.achieved == pytest.approx(empirical_hinge(sol.v, X, y, tau), abs=1e-12)

    def test_feasible_and_deterministic(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            X, y, tau, center, radius = random_solver_instance(rng, 4, 80)
            a = minimize_hinge_in_ball(X, y, tau, center, radius, SolverOptions(seed=3))
            b = minimize_hinge_in_ball(X, y, tau, center, radius, SolverOptions(seed=3))
            assert np.linalg.norm(a.v - center) <= radius + 1e-9
            np.testing.assert_array_equal(a.v, b.v)
            assert a.achieved == b.achieved

    def test_convexity(self):
        rng = np.random.default_rng(5)
        X, y, tau, center, radius = random_solver_instance(rng, 3, 60)
        for _ in range(100):
            u = project_to_ball(center + rng.normal(size=3), center, radius)
            v = project_to_ball(center + rng.normal(size=3), center, radius)
            mid = empirical_hinge((u + v) / 2, X, y, tau)
            avg = (empirical_hinge(u, X, y, tau) + empirical_hinge(v, X, y, tau)) / 2
            assert mid <= avg + 1e-12

    def test_budget_exhaustion_flags(self):
        X, y, tau, center, radius = random_solver_instance(np.random.default_rng(6), 3, 60)
        sol = minimize_hinge_in_ball(X, y, tau, center, radius,
                                     SolverOptions(max_iters=5, restarts=1, epoch_length=5))
        assert not sol.converged
        assert np.linalg.norm(sol.v - center) <= radius + 1e-9
        assert sol.achieved <= empirical_hinge(center, X, y, tau)

    def test_best_restart_wins(self):
        X, y, tau, center, radius = random_solver_instance(np.random.default_rng(7), 3, 60)
        one = minimize_hinge_in_ball(X, y, tau, center, radius, SolverOptions(restarts=1))
        many = minimize_hinge_in_ball(X, y, tau, center, radius, SolverOptions(restarts=5))
        assert many.achieved <= one.achieved

    @pytest.mark.parametrize("kwargs", [dict(radius=0.0), dict(tau=-1.0)])
    def test_bad_arguments(self, kwargs):
        args = dict(X=np.ones((3, 2)) * 0.1, y=[1, 1, 1], tau=1.0, center=np.array([1.0, 0.0]),
                    radius=0.5)
        args.update(kwargs)
        with pytest.raises(ValueError):
            minimize_hinge_in_ball(**args)

    def test_empty_sample(self):
        with pytest.raises(ValueError):
            minimize_hinge_in_ball(np.empty((0, 2)), [], 1.0, np.array([1.0, 0.0]), 0.5)

    def test_bad_options(self):
        with pytest.raises(ValueError):
            SolverOptions(step_decay=1.0)
        with pytest.raises(ValueError):
            SolverOptions(restarts=0)
