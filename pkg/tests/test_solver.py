"""Penalized and complementarity solves against closed forms and the oracle."""

import numpy as np
import pytest

from obstacle_lab.grid import (Field, GridSpec, build_grid,
                               field_from_function)
from obstacle_lab.penalization import Penalization
from obstacle_lab.solver import (DirichletData, NonconvergedError, energy,
                                 oracle_minimize, rescaled_solution,
                                 solve_penalized, solve_signorini,
                                 variational_trace, _discretization,
                                 _nonlinear_residual)


def make_grid(N=32, d=2, L=1.0, H=1.0):
    return build_grid(GridSpec(dimension=d, resolution=N,
                               tangential_extent=L, normal_extent=H))


def column_profile(c, eps, H, y):
    """Exact solution of the one-dimensional penalized column."""
    if c >= 0:
        return np.full_like(y, c)
    if eps is None:
        return c * y / H
    return c * (eps + y) / (eps + H)


class TestDirichletData:
    def test_rejects_unknown_preset(self):
        with pytest.raises(ValueError):
            DirichletData("parabolic")

    def test_constant_profiles(self):
        g = make_grid(N=8)
        vals = DirichletData.constant(-1.0).evaluate(g, 0.1)
        expected = column_profile(-1.0, 0.1, 1.0, g.ys)
        assert np.allclose(vals[:, 3], expected)
        vals0 = DirichletData.constant(-1.0).evaluate(g, None)
        assert np.allclose(vals0[:, 3], -g.ys)
        assert np.all(DirichletData.constant(2.0).evaluate(g, 0.1) == 2.0)

    def test_signorini_exact_trace(self):
        g = make_grid(N=8)
        vals = DirichletData.signorini_exact(2.0).evaluate(g)
        xs = g.xs
        assert np.allclose(vals[0][xs >= 0], 2.0 * xs[xs >= 0] ** 1.5)
        assert np.allclose(vals[0][xs < 0], 0.0)

    def test_signorini_exact_d3_constant_in_first_axis(self):
        g = make_grid(N=8, d=3)
        vals = DirichletData.signorini_exact().evaluate(g)
        assert np.allclose(vals[:, 0, :], vals[:, -1, :])

    def test_positive_bump_signs(self):
        g = make_grid(N=8)
        vals = DirichletData.positive_bump().evaluate(g)
        assert vals[0, 0] > 0 and vals[0, -1] > 0      # flat-boundary rim
        assert np.all(vals[-1] < 0)                    # top face pulls down


class TestEnergy:
    def test_zero_field(self):
        g = make_grid(N=8)
        u = field_from_function(g, lambda x, y: 0.0 * x)
        assert energy(g, u, Penalization(0.3)) == 0.0

    def test_linear_in_y(self):
        # bulk (1/2) * integral of 1 over [-1,1]x[0,1] = 1, no penalty
        g = make_grid(N=16)
        u = field_from_function(g, lambda x, y: y)
        assert energy(g, u, Penalization(0.5)) == pytest.approx(1.0, abs=1e-12)

    def test_constant_negative_one(self):
        # penalty (1/2) * integral of 1 over [-1,1] = 1, zero bulk
        g = make_grid(N=16)
        u = field_from_function(g, lambda x, y: -1.0 + 0.0 * x)
        assert energy(g, u, Penalization(1.0)) == pytest.approx(1.0, abs=1e-12)


class TestSolvePenalized:
    def test_positive_constant_is_exact(self):
        g = make_grid(N=16)
        res = solve_penalized(g, Penalization(0.5), DirichletData.constant(1.0))
        assert np.max(np.abs(res.u.values - 1.0)) < 1e-10
        assert np.max(np.abs(res.uy_trace)) < 1e-10
        assert not res.active_set.any()

    @pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
    def test_negative_constant_closed_form(self, eps):
        g = make_grid(N=32)
        res = solve_penalized(g, Penalization(eps), DirichletData.constant(-1.0))
        expected = column_profile(-1.0, eps, 1.0, g.ys)[:, np.newaxis]
        assert np.max(np.abs(res.u.values - expected)) < 1e-9
        assert res.u.values[0, 5] == pytest.approx(-eps / (1 + eps), abs=1e-9)

    def test_residual_and_complementarity(self):
        g = make_grid(N=32)
        eps, tol = 0.01, 1e-9
        res = solve_penalized(g, Penalization(eps),
                              DirichletData.signorini_exact(), tol=tol)
        assert res.residual <= tol
        flat = g.flat_mask_bottom
        u0 = res.u.values[0][flat]
        uy = res.uy_trace[flat]
        active = u0 < 0
        assert np.max(np.abs(uy[active] - u0[active] / eps)) < 1e-7
        assert np.max(np.abs(uy[~active])) < 1e-7
        assert np.max(res.uy_trace[flat]) <= 1e-7

    def test_signorini_data_converges_in_eps(self):
        g = make_grid(N=64)
        exact = DirichletData.signorini_exact().evaluate(g)
        errs = []
        for eps in (1e-2, 1e-3, 1e-4):
            res = solve_penalized(g, Penalization(eps),
                                  DirichletData.signorini_exact())
            errs.append(np.max(np.abs(res.u.values - exact)))
        assert errs[2] < errs[0]
        assert errs[2] < 5e-4

    def test_max_principle(self):
        g = make_grid(N=32)
        for data in (DirichletData.constant(-1.0),
                     DirichletData.positive_bump(),
                     DirichletData.signorini_exact()):
            for eps in (0.1, 0.001):
                res = solve_penalized(g, Penalization(eps), data)
                gvals = data.evaluate(g, eps)[g.dirichlet_mask]
                assert res.u.values.min() >= gvals.min() - 1e-9
                assert res.u.values.max() <= gvals.max() + 1e-9
                if gvals.min() < 0 < gvals.max():
                    assert np.abs(res.u.values).max() <= np.abs(gvals).max() + 1e-9

    def test_minimality_against_random_perturbations(self):
        g = make_grid(N=16)
        p = Penalization(0.05)
        data = DirichletData.positive_bump()
        res = solve_penalized(g, p, data, tol=1e-10)
        rng = np.random.default_rng(7)
        free = ~g.dirichlet_mask
        for _ in range(100):
            pert = res.u.values.copy()
            pert[free] += 1e-3 * rng.standard_normal(int(free.sum()))
            assert energy(g, Field(g, pert), p) >= res.energy - 1e-12

    def test_rejects_bad_inputs(self):
        g = make_grid(N=8)
        with pytest.raises(ValueError):
            solve_penalized(g, Penalization(0.1), DirichletData.constant(1.0),
                            tol=0.0)

    def test_nonconverged_carries_residual(self):
        g = make_grid(N=16)
        with pytest.raises(NonconvergedError) as info:
            solve_penalized(g, Penalization(1e-3),
                            DirichletData.signorini_exact(), tol=1e-16)
        assert info.value.residual > 0

    def test_d3_small_solve(self):
        g = make_grid(N=8, d=3)
        eps = 0.1
        res = solve_penalized(g, Penalization(eps), DirichletData.constant(-1.0))
        expected = column_profile(-1.0, eps, 1.0, g.ys)[:, None, None]
        assert np.max(np.abs(res.u.values - expected)) < 1e-9


class TestOracle:
    def test_positive_constant(self):
        g = make_grid(N=8)
        u = oracle_minimize(g, Penalization(1.0), DirichletData.constant(1.0),
                            steps=10_000)
        assert np.max(np.abs(u.values - 1.0)) < 1e-6

    def test_matches_solver_small_grids(self):
        for N in (8, 16):
            g = make_grid(N=N)
            p = Penalization(0.1)
            data = DirichletData.constant(-1.0)
            res = solve_penalized(g, p, data, tol=1e-12)
            u = oracle_minimize(g, p, data, steps=200_000)
            assert np.max(np.abs(u.values - res.u.values)) <= 1e-6

    def test_energy_nonincreasing_along_iterates(self):
        g = make_grid(N=8)
        p = Penalization(0.1)
        data = DirichletData.positive_bump()
        checkpoints = [0, 10, 100, 1000, 5000]
        energies = [energy(g, oracle_minimize(g, p, data, steps=s), p)
                    for s in checkpoints]
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))

    def test_explicit_step_size_honored(self):
        g = make_grid(N=8)
        p = Penalization(0.5)
        u = oracle_minimize(g, p, DirichletData.constant(-1.0), steps=50_000,
                            step_size=0.05)
        expected = column_profile(-1.0, 0.5, 1.0, g.ys)[:, np.newaxis]
        assert np.max(np.abs(u.values - expected)) < 1e-6


class TestSolveSignorini:
    def test_positive_constant(self):
        g = make_grid(N=16)
        res = solve_signorini(g, DirichletData.constant(1.0))
        assert np.max(np.abs(res.u.values - 1.0)) < 1e-8

    def test_negative_constant_complementarity_column(self):
        g = make_grid(N=32)
        res = solve_signorini(g, DirichletData.constant(-1.0), tol=1e-9)
        assert np.max(np.abs(res.u.values - (-g.ys[:, None]))) < 1e-7
        assert np.max(np.abs(res.u.values[0])) < 1e-7

    def test_matches_analytic_contact_solution(self):
        g = make_grid(N=64)
        res = solve_signorini(g, DirichletData.signorini_exact(), tol=1e-9)
        exact = DirichletData.signorini_exact().evaluate(g)
        assert np.max(np.abs(res.u.values - exact)) < 1e-3
        flat = g.flat_mask_bottom
        assert res.u.values[0][flat].min() >= -1e-12      # feasibility
        assert res.uy_trace[flat].max() <= 1e-7           # sign of the flux

    def test_penalized_limit_is_signorini(self):
        g = make_grid(N=32)
        data = DirichletData.signorini_exact()
        u0 = solve_signorini(g, data, tol=1e-10)
        errs = {}
        for eps in (1e-2, 1e-3):
            res = solve_penalized(g, Penalization(eps), data)
            errs[eps] = np.max(np.abs(res.u.values - u0.u.values))
        assert errs[1e-3] < errs[1e-2]
        ratio = errs[1e-2] / errs[1e-3]
        assert 5 < ratio < 20          # linear decay in eps

    def test_neg_part_scales_linearly(self):
        g = make_grid(N=32)
        data = DirichletData.signorini_exact()
        sups = []
        eps_list = (1e-1, 1e-2, 1e-3)
        for eps in eps_list:
            res = solve_penalized(g, Penalization(eps), data)
            sups.append(np.maximum(-res.u.values[0], 0.0).max())
        slope = np.polyfit(np.log(eps_list), np.log(sups), 1)[0]
        assert slope == pytest.approx(1.0, abs=0.1)


class TestAnnulusPositivity:
    def test_bump_data_keeps_positive_rim(self):
        from obstacle_lab.estimators import annulus_positivity_width
        g = make_grid(N=32)
        data = DirichletData.positive_bump()
        for eps in (1e-1, 1e-2, 1e-3):
            res = solve_penalized(g, Penalization(eps), data)
            assert annulus_positivity_width(res) > 0
        # contact actually forms, so the width is a real measurement
        res = solve_penalized(g, Penalization(1e-3), data)
        assert res.active_set.any()


class TestRescaledSolution:
    def test_identity_at_eps_one(self):
        g = make_grid(N=16)
        p = Penalization(1.0)
        res = solve_penalized(g, p, DirichletData.signorini_exact())
        v = rescaled_solution(res, p)
        assert np.allclose(v.values, res.u.values, atol=1e-12)

    def test_rescaled_field_solves_unit_problem(self):
        g = make_grid(N=64)
        eps = 0.25
        res = solve_penalized(g, Penalization(eps),
                              DirichletData.signorini_exact(), tol=1e-10)
        v = rescaled_solution(res, Penalization(eps))
        dis = _discretization(g)
        resid = _nonlinear_residual(dis, v.values, 1.0)
        # interior rows of the zoomed field obey the eps'=1 system up to
        # interpolation error; the Laplacian row scale is 1/h, so O(h)
        # pointwise interpolation error shows up as O(1) * C there
        assert resid * g.h < 10 * g.h

    def test_active_set_flux_identity(self):
        g = make_grid(N=64)
        eps = 0.25
        res = solve_penalized(g, Penalization(eps),
                              DirichletData.signorini_exact(), tol=1e-10)
        v = rescaled_solution(res, Penalization(eps))
        vy = variational_trace(v)
        active = g.flat_mask_bottom & (v.values[0] < 0)
        assert active.any()
        gap = np.abs(vy[active] - v.values[0][active]).max()
        assert gap <= 20 * g.h * max(1.0, np.abs(v.values).max())

    def test_scale_exits_grid(self):
        g = make_grid(N=16)
        res = solve_penalized(g, Penalization(1.0),
                              DirichletData.constant(1.0))
        with pytest.raises(ValueError):
            rescaled_solution(res, Penalization(2.0))
