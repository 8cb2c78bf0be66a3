"""Penalization family: evaluation, admissibility audit, scaling law."""

import numpy as np
import pytest

from obstacle_lab.penalization import (Penalization, admissibility_check,
                                       beta_eval, beta_prime, rescale)


class TestEvaluation:
    def test_negative_branch(self):
        assert beta_eval(Penalization(0.1), -0.05) == pytest.approx(-0.5)

    def test_nonnegative_branch(self):
        assert beta_eval(Penalization(0.7), 0.3) == 0.0

    def test_unit_epsilon(self):
        assert beta_eval(Penalization(1.0), -2.0) == -2.0

    def test_derivative(self):
        p = Penalization(0.5)
        assert beta_prime(p, -1.0) == pytest.approx(2.0)
        assert beta_prime(p, 1.0) == 0.0
        assert beta_prime(p, 0.0) == 0.0      # right-derivative convention

    def test_vectorized(self):
        p = Penalization(0.25)
        t = np.array([-1.0, -0.25, 0.0, 2.0])
        assert np.allclose(p.evaluate(t), [-4.0, -1.0, 0.0, 0.0])

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            Penalization(0.0)
        with pytest.raises(ValueError):
            Penalization(-1.0)

    @pytest.mark.parametrize("eps", [0.1, 1.0, 3.0])
    def test_pointwise_invariants(self, eps):
        p = Penalization(eps)
        t = np.linspace(-3, 3, 301)
        v = p.evaluate(t)
        assert np.all(v <= 0.0)
        assert np.all(v[t >= 0] == 0.0)
        assert np.all(np.diff(v) >= 0.0)
        assert np.max(np.abs(np.diff(v))) <= (1.0 / eps) * (t[1] - t[0]) + 1e-12


class TestAdmissibility:
    def test_canonical_passes_all_items(self):
        rep = admissibility_check(Penalization(0.1), (-2.0, 2.0), 101)
        assert rep.all_passed
        assert rep.lipschitz_constant == pytest.approx(10.0, rel=1e-9)

    def test_corrupted_fails_vanishing_item(self):
        def bad(t):
            if abs(t - 1.0) < 1e-12:
                return -1.0
            return min(t, 0.0)

        rep = admissibility_check(bad, (-2.0, 2.0), 101)
        assert not rep.all_passed
        passed, witness = rep.items["vanishes_on_nonnegative"]
        assert not passed and witness == pytest.approx(1.0)

    def test_vacuous_on_nonnegative_range(self):
        rep = admissibility_check(Penalization(1.0), (0.0, 2.0), 11)
        assert rep.all_passed

    def test_needs_three_samples(self):
        with pytest.raises(ValueError):
            admissibility_check(Penalization(1.0), samples=2)


class TestRescale:
    def test_doubling(self):
        p = Penalization(1.0)
        q = rescale(p, 2.0)
        assert q.epsilon == pytest.approx(0.5)
        assert beta_eval(p, 2.0 * -1.0) == beta_eval(q, -1.0) == -2.0

    def test_identity(self):
        p = Penalization(0.2)
        assert rescale(p, 1.0).epsilon == pytest.approx(0.2)

    def test_halving(self):
        p = Penalization(1.0)
        q = rescale(p, 0.5)
        assert q.epsilon == pytest.approx(2.0)
        assert beta_eval(p, -0.5) == beta_eval(q, -1.0) == -0.5

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            rescale(Penalization(1.0), 0.0)
        with pytest.raises(ValueError):
            rescale(Penalization(1.0), -2.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_scaling_covariance_sampled(self, seed):
        rng = np.random.default_rng(seed)
        p = Penalization(float(rng.uniform(0.05, 2.0)))
        for sigma in (0.25, 0.5, 2.0, 4.0):       # dyadic: exact in floats
            q = rescale(p, sigma)
            t = rng.uniform(-5, 5, 29)
            assert np.array_equal(np.asarray(beta_eval(p, sigma * t)),
                                  np.asarray(beta_eval(q, t)))
        sigma = float(np.exp(rng.uniform(-1.5, 1.5)))
        q = rescale(p, sigma)
        t = rng.uniform(-5, 5, 29)
        a = np.asarray(beta_eval(p, sigma * t))
        b = np.asarray(beta_eval(q, t))
        assert np.max(np.abs(a - b)) <= 4 * np.finfo(float).eps * np.max(
            np.abs(a) + 1.0)
