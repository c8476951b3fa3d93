"""
Тесты цен облигаций, ставок и волатильностей
"""
import numpy as np
import pytest

from core.curve import nelson_siegel_curve
from core.exceptions import DomainError, SurvivalError, UnsupportedModelError
from core.pricer import (
    ConditionalDensityBatch,
    ConditionalDensityView,
    annuity_price,
    bond_price,
    bond_prices,
    bond_volatility,
    bond_volatility_annuity_form,
    closed_form_bond_flat_linear,
    excess_return,
    forward_rate,
    forward_rate_drift,
    forward_rate_volatility,
    phi_hat,
    pricing_kernel,
    risk_premium,
    short_rate,
    survival_probability,
)
from core.quad import QuadratureSpec
from models.information import MarketState, ModelSpec, PhiFunction, RateSchedule

TIGHT = QuadratureSpec(refinement=12, rel_tol=1e-12, abs_tol=1e-15)


def view_at(curve, model, t=0.0, xi=0.0, spec=None):
    return ConditionalDensityView(curve, model, MarketState.from_xi(model, t, xi), spec)


def random_states(n, seed):
    """(t, xi, T) с t в [0.25, 5], xi в [-1, 3], T - t в [0.5, 20]"""
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.25, 5.0, n)
    return list(zip(t, rng.uniform(-1.0, 3.0, n), t + rng.uniform(0.5, 20.0, n)))


class TestCalibration:

    @pytest.mark.parametrize("T", [0.5, 1.0, 5.0, 12.0, 30.0])
    def test_initial_prices_match_curve(self, flat_curve, table_curve, paths_model, T):
        for curve in (flat_curve, table_curve):
            assert abs(bond_price(view_at(curve, paths_model), T) - curve.discount(T)) < 1e-9

    def test_gamma_initial_prices_match_curve(self, flat_curve, gamma_model):
        prices = bond_prices(view_at(flat_curve, gamma_model), [1.0, 5.0, 10.0])
        assert np.allclose(prices, np.exp(-0.02 * np.array([1.0, 5.0, 10.0])), atol=1e-9)

    def test_initial_rates(self, flat_curve, table_curve, paths_model):
        assert np.isclose(short_rate(view_at(flat_curve, paths_model)), 0.02, rtol=1e-9)
        assert np.isclose(forward_rate(view_at(flat_curve, paths_model), 7.0), 0.02, rtol=1e-9)
        view = view_at(table_curve, paths_model)
        assert np.isclose(forward_rate(view, 3.5), table_curve.initial_forward_rate(3.5), rtol=1e-9)

    def test_pricing_kernel_starts_at_one(self, flat_curve, paths_model):
        assert np.isclose(pricing_kernel(view_at(flat_curve, paths_model)), 1.0, rtol=1e-12)

    def test_bond_at_its_maturity(self, flat_curve, paths_model):
        assert bond_price(view_at(flat_curve, paths_model, 2.0, 0.4), 2.0) == 1.0


class TestDeterministicLimit:

    def test_zero_sigma_is_forward_discount(self, flat_curve, deterministic_model):
        view = view_at(flat_curve, deterministic_model, 1.0, 0.7)
        assert np.isclose(bond_price(view, 5.0), 0.923116, atol=1e-6)

    def test_zero_sigma_survival(self, flat_curve, deterministic_model):
        view = view_at(flat_curve, deterministic_model, 3.0, 0.0)
        assert np.isclose(survival_probability(view), np.exp(-0.06), rtol=1e-9)

    def test_phi_hat_linear(self, flat_curve):
        model = ModelSpec.brownian(PhiFunction.linear(), 0.0)
        assert np.isclose(phi_hat(view_at(flat_curve, model), 5.0), 55.0, rtol=1e-8)

    def test_annuity(self, flat_curve, deterministic_model):
        assert np.isclose(annuity_price(view_at(flat_curve, deterministic_model), 0.0), 50.0, rtol=1e-8)

    @pytest.mark.parametrize("phi", [PhiFunction.linear(), PhiFunction.exp_decay(0.025), PhiFunction.reciprocal(-1.0)])
    def test_zero_sigma_across_curves(self, flat_curve, table_curve, phi):
        model = ModelSpec.brownian(phi, 0.0)
        for curve in (flat_curve, table_curve, nelson_siegel_curve(0.03, -0.01, 0.005, 2.0)):
            for t, xi in [(0.5, -1.0), (2.0, 0.0), (4.0, 2.5)]:
                view = view_at(curve, model, t, xi)
                for T in (t, t + 0.75, 7.5, 25.0):
                    expected = curve.discount(T) / curve.discount(t)
                    assert abs(bond_price(view, T) - expected) < 1e-12


class TestStochasticPrices:

    @pytest.mark.parametrize("t,xi,T", [(2.0, 1.5, 5.0), (1.0, -0.5, 3.0), (5.0, 4.0, 20.0)])
    def test_closed_form_flat_linear(self, flat_curve, linear_model, t, xi, T):
        numeric = bond_price(view_at(flat_curve, linear_model, t, xi), T)
        exact = closed_form_bond_flat_linear(0.02, 0.3, t, xi, T)
        assert abs(numeric - exact) < 1e-7

    @pytest.mark.parametrize("t", np.linspace(0.5, 5.0, 10))
    def test_closed_form_grid(self, flat_curve, linear_model, t):
        for xi in np.linspace(-1.0, 4.0, 10):
            view = view_at(flat_curve, linear_model, t, xi)
            for T in t + np.linspace(0.25, 20.0, 10):
                exact = closed_form_bond_flat_linear(0.02, 0.3, t, xi, T)
                assert abs(bond_price(view, T) - exact) < 1e-7

    @pytest.mark.parametrize("fixture,direction", [("linear_model", 1.0), ("paths_model", -1.0)])
    def test_monotone_in_information(self, request, flat_curve, fixture, direction):
        model = request.getfixturevalue(fixture)
        prices = np.array([bond_price(view_at(flat_curve, model, 2.0, xi), 6.0) for xi in np.linspace(-2.0, 3.0, 11)])
        assert np.all(direction * np.diff(prices) > 0.0)

    @pytest.mark.parametrize("fixture", ["paths_model", "linear_model"])
    @pytest.mark.parametrize("t,xi,T", random_states(4, seed=17))
    def test_short_rate_is_slope_at_maturity(self, request, flat_curve, fixture, t, xi, T):
        view = view_at(flat_curve, request.getfixturevalue(fixture), t, xi, TIGHT)
        r = short_rate(view)
        h = min(0.01 / r, 0.1)
        P = [bond_price(view, t + k * h) for k in range(5)]
        slope = (25.0 * P[0] - 48.0 * P[1] + 36.0 * P[2] - 16.0 * P[3] + 3.0 * P[4]) / (12.0 * h)
        assert np.isclose(r, slope, rtol=1e-6)

    @pytest.mark.parametrize("fixture", ["paths_model", "linear_model"])
    @pytest.mark.parametrize("t,xi,T", random_states(4, seed=18))
    def test_forward_rate_is_log_slope(self, request, flat_curve, fixture, t, xi, T):
        view = view_at(flat_curve, request.getfixturevalue(fixture), t, xi, TIGHT)
        f = forward_rate(view, T)
        h = min(0.01 / f, 0.1)
        g = [view.log_tail_mass(T + k * h) for k in (-2, -1, 1, 2)]
        slope = -(g[0] - 8.0 * g[1] + 8.0 * g[2] - g[3]) / (12.0 * h)
        assert np.isclose(f, slope, rtol=1e-6)

    def test_prices_decrease_with_maturity(self, table_curve, paths_model):
        prices = bond_prices(view_at(table_curve, paths_model, 2.0, 0.8), [2.5, 3.0, 5.0, 10.0, 40.0])
        assert np.all(np.diff(prices) < 0.0)
        assert np.all((prices > 0.0) & (prices < 1.0))

    def test_constant_schedule_matches_constant_sigma(self, flat_curve, paths_model):
        td = ModelSpec.time_dependent(paths_model.phi, RateSchedule.constant(0.3))
        a = bond_price(view_at(flat_curve, paths_model, 2.0, 0.6), 5.0)
        b = bond_price(view_at(flat_curve, td, 2.0, 0.6), 5.0)
        assert abs(a - b) < 1e-12

    def test_gamma_prices(self, flat_curve, gamma_model):
        view = view_at(flat_curve, gamma_model, 2.0, 3.0)
        prices = bond_prices(view, [3.0, 5.0, 10.0])
        assert np.all(np.diff(prices) < 0.0)
        assert 0.0 < prices[-1] < prices[0] < 1.0
        assert short_rate(view) > 0.0

    def test_batch_matches_view(self, flat_curve, paths_model):
        xi = np.array([-1.0, 0.0, 0.7, 2.5])
        batch = ConditionalDensityBatch(flat_curve, paths_model, 2.0, eta=0.3 * xi)
        for i, value in enumerate(xi):
            view = view_at(flat_curve, paths_model, 2.0, value)
            assert np.isclose(batch.bond_price(5.0)[i], bond_price(view, 5.0), rtol=1e-8)
            assert np.isclose(batch.short_rate()[i], short_rate(view), rtol=1e-8)
            assert np.isclose(batch.phi_hat(5.0)[i], phi_hat(view, 5.0), rtol=1e-8)


class TestVolatilities:

    @pytest.mark.parametrize("phi", [PhiFunction.linear(), PhiFunction.exp_decay(0.025), PhiFunction.exp_decay(0.05, sign=-1)])
    def test_annuity_form(self, flat_curve, phi):
        model = ModelSpec.brownian(phi, 0.3)
        for t, xi, T in random_states(50, seed=5):
            view = view_at(flat_curve, model, t, xi)
            assert abs(bond_volatility_annuity_form(view, T) - bond_volatility(view, T)) < 1e-6

    @pytest.mark.parametrize("t,xi", [(0.5, -0.5), (2.0, 0.5), (4.0, 2.0)])
    def test_linear_annuity_identities(self, flat_curve, linear_model, t, xi):
        view = view_at(flat_curve, linear_model, t, xi)
        assert np.isclose(annuity_price(view, t), phi_hat(view, t) - t, rtol=1e-8)
        T = t + 3.0
        assert np.isclose(annuity_price(view, T) / bond_price(view, T), phi_hat(view, T) - T, rtol=1e-8)

    def test_annuity_form_needs_known_phi(self, flat_curve):
        model = ModelSpec.brownian(PhiFunction.reciprocal(-1.0), 0.3)
        with pytest.raises(UnsupportedModelError):
            bond_volatility_annuity_form(view_at(flat_curve, model, 1.0, 0.2), 3.0)

    def test_bond_volatility_vanishes_at_maturity(self, flat_curve, paths_model):
        assert bond_volatility(view_at(flat_curve, paths_model, 2.0, 0.5), 2.0) == 0.0

    def test_risk_premium_sign(self, flat_curve, linear_model):
        decreasing = ModelSpec.brownian(PhiFunction.exp_decay(0.05), 0.25)
        increasing = ModelSpec.brownian(PhiFunction.exp_decay(0.05, sign=-1), 0.25)
        assert risk_premium(view_at(flat_curve, decreasing, 1.0, 0.3)) < 0.0
        assert risk_premium(view_at(flat_curve, increasing, 1.0, 0.3)) > 0.0
        for t, xi in [(0.5, -1.0), (2.0, 0.5), (4.0, 3.0)]:
            assert risk_premium(view_at(flat_curve, linear_model, t, xi)) < 0.0

    def test_excess_return_sign(self, flat_curve, linear_model):
        for sign in (1, -1):
            model = ModelSpec.brownian(PhiFunction.exp_decay(0.05, sign=sign), 0.25)
            for t, xi, T in [(0.5, -1.0, 3.0), (2.0, 0.5, 7.0), (4.0, 3.0, 20.0)]:
                view = view_at(flat_curve, model, t, xi)
                assert excess_return(view, T) > 0.0
                expected = 0.25 * bond_volatility(view, T) * risk_premium(view)
                assert np.isclose(excess_return(view, T), expected, rtol=1e-12)
        assert excess_return(view_at(flat_curve, linear_model, 2.0, 0.5), 6.0) < 0.0

    @pytest.mark.parametrize("fixture", ["paths_model", "linear_model", "option_model"])
    def test_forward_drift_matches_volatility_slope(self, request, flat_curve, fixture):
        model = request.getfixturevalue(fixture)
        view = view_at(flat_curve, model, 2.0, 0.5)
        T, h = 6.0, 1e-3
        slope = (bond_volatility(view, T + h) - bond_volatility(view, T - h)) / (2.0 * h)
        expected = model.sigma ** 2 * bond_volatility(view, T) * slope
        assert np.isclose(forward_rate_drift(view, T), expected, rtol=1e-3)

    def test_forward_volatility_is_slope_of_bond_volatility(self, flat_curve, paths_model):
        view = view_at(flat_curve, paths_model, 2.0, 0.5)
        T, h = 6.0, 1e-3
        slope = (bond_volatility(view, T + h) - bond_volatility(view, T - h)) / (2.0 * h)
        assert np.isclose(forward_rate_volatility(view, T), -0.3 * slope, rtol=1e-3)


class TestErrors:

    def test_dead_state(self, flat_curve, paths_model):
        with pytest.raises(SurvivalError):
            ConditionalDensityView(flat_curve, paths_model, MarketState(t=1.0, alive=False))

    def test_maturity_before_now(self, flat_curve, paths_model):
        with pytest.raises(DomainError):
            bond_price(view_at(flat_curve, paths_model, 2.0, 0.0), 1.0)

    def test_gamma_has_no_phi_hat(self, flat_curve, gamma_model):
        with pytest.raises(UnsupportedModelError):
            phi_hat(view_at(flat_curve, gamma_model, 1.0, 0.5), 3.0)

    def test_closed_form_arguments(self):
        with pytest.raises(DomainError):
            closed_form_bond_flat_linear(0.02, 0.3, 0.0, 0.0, 1.0)
