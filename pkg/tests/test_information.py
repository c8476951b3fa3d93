"""
Тесты информационного процесса и выбора момента кризиса
"""
import numpy as np
import pytest

from core.exceptions import DomainError, SurvivalError
from core.information import advance_paths, draw_crisis_time, draw_gamma_increments, evolve_information, phi_eval
from models.enums import PhiKind, ProcessKind
from models.information import MarketState, ModelSpec, PhiFunction, RateSchedule


class TestPhi:

    def test_values(self):
        assert phi_eval(PhiFunction.linear(), 3.0) == 3.0
        assert phi_eval(PhiFunction.reciprocal(-1.0), 0.0) == 1.0
        assert np.isclose(phi_eval(PhiFunction.exp_decay(0.025), 10.0), 0.778801, atol=1e-6)

    def test_negative_sign(self):
        phi = PhiFunction.exp_decay(0.05, sign=-1)
        assert phi(0.0) == -1.0
        assert phi.is_increasing
        assert not PhiFunction.exp_decay(0.05).is_increasing

    def test_pole_must_be_negative(self):
        with pytest.raises(DomainError):
            PhiFunction.reciprocal(0.0)
        with pytest.raises(DomainError):
            PhiFunction.reciprocal(2.0)

    def test_negative_argument(self):
        with pytest.raises(DomainError):
            PhiFunction.linear()(-0.5)

    def test_range(self):
        low, high = PhiFunction.exp_decay(0.1).range_on(5.0)
        assert low == 0.0
        assert np.isclose(high, np.exp(-0.5))
        assert PhiFunction.linear().range_on(2.0) == (2.0, np.inf)

    def test_kind(self):
        assert PhiFunction.reciprocal(-2.0).kind is PhiKind.RECIPROCAL


class TestModelSpec:

    def test_constant_schedule_matches_constant_sigma(self):
        td = ModelSpec.time_dependent(PhiFunction.linear(), RateSchedule.constant(0.3))
        assert np.isclose(td.integrated_variance(2.0), 0.18)
        assert td.rate_at(1.5) == 0.3

    def test_stepped_schedule(self, stepped_model):
        assert stepped_model.rate_at(0.5) == 0.2
        assert stepped_model.rate_at(1.0) == 0.35
        assert np.isclose(stepped_model.integrated_variance(2.0), 0.04 + 0.1225)

    def test_gamma_has_no_rate(self, gamma_model):
        assert not gamma_model.is_brownian
        with pytest.raises(DomainError):
            gamma_model.rate_at(1.0)

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            ModelSpec.brownian(PhiFunction.linear(), -0.1)
        with pytest.raises(DomainError):
            ModelSpec.gamma(0.0)
        with pytest.raises(DomainError):
            RateSchedule(((0.5, 0.2),))

    def test_state_from_xi(self, linear_model):
        state = MarketState.from_xi(linear_model, 2.0, 1.5)
        assert np.isclose(state.eta, 0.45)
        assert np.isclose(state.tau, 0.18)


class TestEvolution:

    def test_deterministic_step(self, linear_model):
        state = evolve_information(linear_model, MarketState.initial(), 10.0, 1.0, 0.0)
        assert np.isclose(state.xi, 3.0)
        assert np.isclose(state.eta, 0.9)
        assert np.isclose(state.tau, 0.09)
        assert state.alive

    def test_crossing_the_crisis(self, linear_model):
        state = MarketState.from_xi(linear_model, 1.5, 0.0)
        after = evolve_information(linear_model, state, 2.0, 1.0, 0.0)
        assert not after.alive
        with pytest.raises(SurvivalError):
            evolve_information(linear_model, after, 2.0, 1.0, 0.0)

    def test_nonpositive_step(self, linear_model):
        with pytest.raises(DomainError):
            evolve_information(linear_model, MarketState.initial(), 10.0, 0.0, 0.0)

    def test_gamma_step(self, gamma_model):
        state = evolve_information(gamma_model, MarketState.initial(), 4.0, 0.5, 0.25)
        assert state.xi == 1.0
        with pytest.raises(DomainError):
            evolve_information(gamma_model, MarketState.initial(), 4.0, 0.5, -0.1)

    def test_vector_step(self, linear_model):
        xi = np.zeros(3)
        dxi, xi, eta, tau = advance_paths(linear_model, 0.0, xi, xi.copy(), 0.0, np.array([1.0, 2.0, 3.0]), 0.5, np.zeros(3))
        assert np.allclose(dxi, 0.3 * 0.5 * np.array([1.0, 2.0, 3.0]))
        assert np.allclose(eta, 0.3 * xi)
        assert np.isclose(tau, 0.045)


class TestCrisisTime:

    def test_inverse_transform(self, flat_curve):
        assert np.isclose(draw_crisis_time(flat_curve, np.exp(-0.1)), 5.0)

    @pytest.mark.parametrize("u", [0.0, 1.0, -0.2, 1.3])
    def test_uniform_outside_open_interval(self, flat_curve, u):
        with pytest.raises(DomainError):
            draw_crisis_time(flat_curve, u)

    def test_empirical_survival(self, flat_curve):
        rng = np.random.default_rng(3)
        x = draw_crisis_time(flat_curve, rng.uniform(size=200000))
        assert abs(np.mean(x >= 10.0) - np.exp(-0.2)) < 0.005

    def test_gamma_increments(self):
        rng = np.random.default_rng(5)
        draws = draw_gamma_increments(rng, 0.1, 2.0, 200000)
        assert np.all(draws >= 0.0)
        assert abs(draws.mean() - 0.2) < 0.01
        assert ModelSpec.gamma(0.1).process is ProcessKind.GAMMA
