"""
Тесты опционов на облигацию, свопционов, веги и подразумеваемой sigma
"""
import numpy as np
import pytest

from core.exceptions import ConjectureViolationError, DomainError, RangeError, UnsupportedModelError
from core.pricer import ConditionalDensityView, bond_price
from core.quad import RootSpec
from models.enums import InstrumentType, PricingMethod
from models.information import MarketState
from models.instruments import BondOptionSpec, OptionQuote, SwaptionSpec
from services.derivatives import (
    DerivativesPricer,
    bond_call_price,
    bond_call_price_quadrature,
    bond_payoff,
    bond_put_price,
    hybrid_price,
    implied_sigma,
    swaption_payoff,
    swaption_price,
    vega,
)

STRIKES = [0.85, 0.875, 0.90, 0.925, 0.95]


def forward_value(curve, option):
    return curve.discount(option.bond_maturity) - option.strike * curve.discount(option.option_maturity)


class TestCallBoundaries:

    def test_zero_strike(self, flat_curve, option_model):
        quote = bond_call_price(BondOptionSpec(2.0, 5.0, 0.0), option_model, flat_curve)
        assert quote.boundary
        assert quote.method is PricingMethod.BOUNDARY
        assert np.isclose(quote.price, 0.904837, atol=1e-6)

    def test_unit_strike(self, flat_curve, option_model):
        quote = bond_call_price(BondOptionSpec(2.0, 5.0, 1.0), option_model, flat_curve)
        assert quote.boundary
        assert quote.price == 0.0

    def test_zero_sigma_is_intrinsic(self, flat_curve, option_model):
        option = BondOptionSpec(2.0, 5.0, 0.9)
        quote = bond_call_price(option, option_model.with_sigma(0.0), flat_curve)
        assert np.isclose(quote.price, max(forward_value(flat_curve, option), 0.0), rtol=1e-14)

    def test_invalid_option(self):
        with pytest.raises(DomainError):
            BondOptionSpec(5.0, 2.0, 0.9)
        with pytest.raises(DomainError):
            BondOptionSpec(2.0, 5.0, -0.1)


class TestCallPrices:

    @pytest.mark.parametrize("K", STRIKES)
    def test_analytic_matches_clipped_quadrature(self, flat_curve, option_model, K):
        option = BondOptionSpec(2.0, 5.0, K)
        analytic = bond_call_price(option, option_model, flat_curve)
        clipped = bond_call_price_quadrature(option, option_model, flat_curve)
        assert analytic.method is PricingMethod.ANALYTIC
        assert clipped.method is PricingMethod.QUADRATURE
        assert abs(analytic.price - clipped.price) < 1e-7

    def test_monotone_and_convex_in_strike(self, flat_curve, option_model):
        prices = np.array([
            bond_call_price(BondOptionSpec(2.0, 5.0, K), option_model, flat_curve).price for K in STRIKES
        ])
        assert np.all(np.diff(prices) < 0.0)
        assert np.all(np.diff(prices, 2) > -1e-10)

    @pytest.mark.parametrize("K", STRIKES)
    def test_lower_bound(self, flat_curve, option_model, K):
        option = BondOptionSpec(2.0, 5.0, K)
        price = bond_call_price(option, option_model, flat_curve).price
        assert price >= max(forward_value(flat_curve, option), 0.0) - 1e-12
        assert price <= flat_curve.discount(5.0)

    def test_critical_value_prices_the_bond_at_strike(self, flat_curve, option_model):
        option = BondOptionSpec(2.0, 5.0, 0.93)
        quote = bond_call_price(option, option_model, flat_curve)
        state = MarketState.from_xi(option_model, 2.0, quote.critical_value)
        assert np.isclose(bond_price(ConditionalDensityView(flat_curve, option_model, state), 5.0), 0.93, rtol=1e-9)

    def test_table_curve(self, table_curve, option_model):
        option = BondOptionSpec(1.0, 4.0, 0.93)
        analytic = bond_call_price(option, option_model, table_curve).price
        clipped = bond_call_price_quadrature(option, option_model, table_curve).price
        assert abs(analytic - clipped) < 1e-7

    def test_put_call_parity(self, flat_curve, option_model):
        option = BondOptionSpec(2.0, 5.0, 0.95)
        call = bond_call_price(option, option_model, flat_curve)
        put = bond_put_price(option, option_model, flat_curve)
        assert put.instrument is InstrumentType.PUT
        assert np.isclose(call.price - put.price, forward_value(flat_curve, option), atol=1e-14)

    def test_gamma_model_unsupported(self, flat_curve, gamma_model):
        with pytest.raises(UnsupportedModelError):
            bond_call_price(BondOptionSpec(2.0, 5.0, 0.9), gamma_model, flat_curve)


class TestSwaption:

    def test_zero_strike_is_floating_leg(self, flat_curve, option_model):
        quote = swaption_price(SwaptionSpec(1.0, (2.0, 3.0, 4.0, 5.0), 0.0), option_model, flat_curve)
        assert quote.boundary
        assert np.isclose(quote.price, np.exp(-0.02) - np.exp(-0.1), rtol=1e-14)
        assert np.isclose(quote.price, 0.075361, atol=1e-6)

    def test_huge_strike_is_worthless(self, flat_curve, option_model):
        quote = swaption_price(SwaptionSpec(1.0, (2.0, 3.0, 4.0, 5.0), 10.0), option_model, flat_curve)
        assert quote.price == 0.0

    def test_single_date_is_scaled_put(self, flat_curve, option_model):
        K = 0.02
        swaption = swaption_price(SwaptionSpec(1.0, (3.0,), K), option_model, flat_curve).price
        put = bond_put_price(BondOptionSpec(1.0, 3.0, 1.0 / (1.0 + K)), option_model, flat_curve).price
        assert abs(swaption - (1.0 + K) * put) < 1e-7

    def test_decreasing_in_strike(self, flat_curve, option_model):
        prices = [
            swaption_price(SwaptionSpec(1.0, (2.0, 3.0, 4.0, 5.0), K), option_model, flat_curve).price
            for K in (0.005, 0.02, 0.04)
        ]
        assert prices[0] > prices[1] > prices[2] >= 0.0

    def test_dates_must_follow_expiry(self):
        with pytest.raises(DomainError):
            SwaptionSpec(2.0, (1.5, 3.0), 0.02)
        with pytest.raises(DomainError):
            SwaptionSpec(1.0, (3.0, 2.0), 0.02)


class TestHybrid:

    def test_unit_payoff_is_bond(self, flat_curve, option_model):
        quote = hybrid_price(lambda batch: np.ones(batch.size), 5.0, option_model, flat_curve,
                             MarketState.initial(), n_paths=20000, seed=1)
        assert quote.instrument is InstrumentType.HYBRID
        assert abs(quote.price - flat_curve.discount(5.0)) <= 3.0 * quote.standard_error + 1e-9

    def test_bond_payoff_matches_call(self, flat_curve, option_model):
        option = BondOptionSpec(2.0, 5.0, 0.93)
        exact = bond_call_price(option, option_model, flat_curve).price
        quote = hybrid_price(bond_payoff(5.0, 0.93), 2.0, option_model, flat_curve, MarketState.initial(),
                             n_paths=40000, seed=3, antithetic=True)
        assert abs(quote.price - exact) <= 3.0 * quote.standard_error

    def test_swaption_payoff_matches_quadrature(self, flat_curve, option_model):
        swaption = SwaptionSpec(1.0, (3.0,), 0.04)
        exact = swaption_price(swaption, option_model, flat_curve).price
        quote = hybrid_price(swaption_payoff(swaption), 1.0, option_model, flat_curve, MarketState.initial(),
                             n_paths=40000, seed=5, antithetic=True)
        assert abs(quote.price - exact) <= 3.0 * quote.standard_error

    @pytest.mark.slow
    @pytest.mark.parametrize("K", [0.01, 0.03, 0.04, 0.05])
    def test_single_date_swaption_monte_carlo(self, flat_curve, option_model, K):
        swaption = SwaptionSpec(1.0, (3.0,), K)
        exact = swaption_price(swaption, option_model, flat_curve).price
        quote = hybrid_price(swaption_payoff(swaption), 1.0, option_model, flat_curve, MarketState.initial(),
                             n_paths=1_000_000, seed=21, antithetic=True)
        assert abs(quote.price - exact) <= 3.0 * quote.standard_error

    def test_gamma_model_unsupported(self, flat_curve, gamma_model):
        with pytest.raises(UnsupportedModelError):
            hybrid_price(lambda batch: np.ones(batch.size), 5.0, gamma_model, flat_curve, MarketState.initial())


class TestVegaAndImpliedSigma:

    def test_vega_of_boundary_is_zero(self, flat_curve, option_model):
        assert vega(BondOptionSpec(2.0, 5.0, 0.0), option_model, flat_curve) == 0.0

    def test_vega_sign_across_strikes(self, flat_curve, option_model):
        active = 0
        for K in np.linspace(0.80, 0.99, 10):
            option = BondOptionSpec(2.0, 5.0, K)
            call = bond_call_price(option, option_model, flat_curve).price
            time_value = min(call, call - forward_value(flat_curve, option))
            value = vega(option, option_model, flat_curve)
            if time_value > 1e-8:
                active += 1
                assert value > 0.0
            else:
                assert value > -1e-6
        assert active >= 3

    def test_vega_matches_price_difference(self, flat_curve, option_model):
        option = BondOptionSpec(2.0, 5.0, 0.93)
        up = bond_call_price(option, option_model.with_sigma(0.26), flat_curve).price
        down = bond_call_price(option, option_model.with_sigma(0.24), flat_curve).price
        assert np.isclose(vega(option, option_model, flat_curve), (up - down) / 0.02, rtol=1e-2)

    @pytest.mark.parametrize("K", [0.92, 0.93, 0.94, 0.95])
    def test_round_trip(self, flat_curve, option_model, K):
        pricer = DerivativesPricer(root=RootSpec(abs_tol=1e-14, rel_tol=1e-15))
        option = BondOptionSpec(2.0, 5.0, K)
        price = pricer.bond_call_price(option, option_model, flat_curve).price
        assert abs(pricer.implied_sigma(option, price, option_model, flat_curve) - 0.25) < 1e-8

    @pytest.mark.parametrize("observed", [-0.01, 0.95])
    def test_unattainable_price(self, flat_curve, option_model, observed):
        with pytest.raises(RangeError):
            implied_sigma(BondOptionSpec(2.0, 5.0, 0.95), observed, option_model, flat_curve)

    def test_boundary_strike_has_flat_price(self, flat_curve, option_model):
        with pytest.raises(RangeError):
            implied_sigma(BondOptionSpec(2.0, 5.0, 0.0), 0.9, option_model, flat_curve)

    def test_non_monotone_price_is_reported(self, monkeypatch, flat_curve, option_model):
        pricer = DerivativesPricer()

        def wavy(option, model, curve):
            return OptionQuote(InstrumentType.CALL, float(np.sin(3.0 * model.sigma)), PricingMethod.ANALYTIC)

        monkeypatch.setattr(pricer, "bond_call_price", wavy)
        with pytest.raises(ConjectureViolationError):
            pricer.implied_sigma(BondOptionSpec(2.0, 5.0, 0.9), 0.5, option_model, flat_curve)
