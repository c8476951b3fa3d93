"""
Тесты Монте-Карло: воспроизводимость, пути под Q, оценка под B,
диагностика и гамма-модель
"""
from pathlib import Path

import numpy as np
import pytest

from core.curve import FlatCurve
from core.exceptions import DiagnosticError, DomainError, UnsupportedModelError
from core.pricer import ConditionalDensityView, bond_price
from core.scenario_loader import load_scenario
from core.streams import Moments, block_sizes, map_blocks, merge_all
from models.enums import InstrumentType, Measure
from models.information import MarketState, ModelSpec, PhiFunction
from models.instruments import BondOptionSpec
from models.simulation import SimulationPlan
from services.derivatives import bond_call_price
from services.monte_carlo import (
    MartingaleAccumulator,
    MonteCarloEngine,
    default_check_times,
    gamma_oracle_grid,
    gamma_weight_oracle,
    innovations_diagnostics,
    martingale_diagnostics,
    price_option_mc,
    simulate_gamma,
    simulate_q,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "config" / "scenarios"
STRIKES = [0.85, 0.875, 0.90, 0.925, 0.95]


def q_plan(**kwargs):
    params = dict(n_paths=40, dt=0.1, horizon=2.0, seed=42, reference_maturity=5.0)
    params.update(kwargs)
    return SimulationPlan(**params)


def b_plan(t, **kwargs):
    params = dict(n_paths=20000, dt=t, horizon=t, seed=9, measure=Measure.B)
    params.update(kwargs)
    return SimulationPlan(**params)


class TestStreams:

    def test_block_layout(self):
        assert block_sizes(10, 4) == [(0, 4), (1, 4), (2, 2)]
        with pytest.raises(ValueError):
            block_sizes(0, 4)

    def test_blocks_do_not_depend_on_workers(self):
        def draw(rng, block, size):
            return rng.standard_normal(size)

        serial = np.concatenate(map_blocks(draw, 5, 1000, 64, workers=1))
        threaded = np.concatenate(map_blocks(draw, 5, 1000, 64, workers=4))
        assert np.array_equal(serial, threaded)

    def test_moments_merge(self):
        rng = np.random.default_rng(0)
        a, b, c = rng.normal(size=17), rng.normal(size=40), rng.normal(size=3)
        merged = merge_all([Moments.of(a), Moments.of(b), Moments.of(c)])
        whole = Moments.of(np.concatenate([a, b, c]))
        assert merged.n == whole.n
        assert np.isclose(merged.mean, whole.mean, rtol=1e-12)
        assert np.isclose(merged.variance, whole.variance, rtol=1e-12)
        assert Moments().merge(Moments.of(a)) == Moments.of(a)


class TestPlan:

    def test_grid(self):
        plan = q_plan()
        assert plan.n_steps == 20
        assert plan.times[-1] == 2.0
        assert plan.bond_maturity == 5.0

    def test_invalid_plans(self):
        with pytest.raises(DomainError):
            q_plan(dt=0.0)
        with pytest.raises(DomainError):
            q_plan(horizon=0.05)
        with pytest.raises(DomainError):
            q_plan(n_paths=0)

    def test_default_check_times(self):
        assert default_check_times(q_plan()) == (1.0, 2.0)
        assert default_check_times(q_plan(), [0.5]) == (0.5,)
        assert default_check_times(q_plan(horizon=0.5, dt=0.1)) == (0.5,)


class TestSimulationQ:

    def test_same_seed_same_paths(self, flat_curve, paths_model):
        first = simulate_q(q_plan(), paths_model, flat_curve)
        second = simulate_q(q_plan(), paths_model, flat_curve)
        assert np.array_equal(first[0].xi, second[0].xi)
        assert np.array_equal(first[0].bond, second[0].bond, equal_nan=True)

    def test_paths_do_not_depend_on_workers(self, flat_curve, paths_model):
        serial = MonteCarloEngine().simulate_q(q_plan(block_size=16, workers=1), paths_model, flat_curve)
        threaded = MonteCarloEngine().simulate_q(q_plan(block_size=16, workers=3), paths_model, flat_curve)
        assert len(serial) == len(threaded) == 3
        for a, b in zip(serial, threaded):
            assert np.array_equal(a.xi, b.xi)
            assert np.array_equal(a.short_rate, b.short_rate, equal_nan=True)

    def test_path_invariants(self, flat_curve, paths_model):
        bundle = simulate_q(q_plan(), paths_model, flat_curve)[0]
        assert np.all(bundle.xi[:, 0] == 0.0)
        assert np.allclose(bundle.bond[:, 0], np.exp(-0.1), rtol=1e-10)
        assert np.allclose(bundle.short_rate[:, 0], 0.02, rtol=1e-10)
        assert np.all(np.diff(bundle.alive.astype(int), axis=1) <= 0)
        dead = ~bundle.alive
        assert np.all(np.isnan(bundle.bond[dead]))
        live_bonds = bundle.bond[bundle.alive]
        assert np.all((live_bonds > 0.0) & (live_bonds <= 1.0))

    def test_zero_sigma_innovation_is_information(self, flat_curve, deterministic_model):
        bundle = simulate_q(q_plan(), deterministic_model, flat_curve)[0]
        alive = bundle.alive
        assert np.allclose(bundle.innovation[alive], bundle.xi[alive], atol=1e-14)
        assert np.allclose(bundle.log_density[alive], 0.0, atol=1e-14)
        assert np.allclose(bundle.short_rate[alive], 0.02, rtol=1e-10)

    def test_path_samples(self, flat_curve, paths_model):
        bundle = simulate_q(q_plan(n_paths=3), paths_model, flat_curve)[0]
        samples = list(bundle)
        assert len(samples) == 3
        assert np.array_equal(samples[1].xi, bundle.xi[1])

    def test_wrong_measure_or_model(self, flat_curve, paths_model, gamma_model):
        with pytest.raises(DomainError):
            simulate_q(q_plan(measure=Measure.B), paths_model, flat_curve)
        with pytest.raises(UnsupportedModelError):
            simulate_q(q_plan(), gamma_model, flat_curve)


class TestOptionMonteCarlo:

    def test_zero_sigma_has_no_noise(self, flat_curve, deterministic_model):
        option = BondOptionSpec(2.0, 5.0, 0.9)
        price, se = price_option_mc(option, deterministic_model, flat_curve, b_plan(2.0, n_paths=500))
        assert se < 1e-12
        assert np.isclose(price, np.exp(-0.1) - 0.9 * np.exp(-0.04), rtol=1e-9)

    def test_zero_strike_prices_the_bond(self, flat_curve, option_model):
        price, se = price_option_mc(BondOptionSpec(2.0, 5.0, 0.0), option_model, flat_curve, b_plan(2.0))
        assert abs(price - np.exp(-0.1)) <= 3.0 * se

    def test_matches_analytic_price(self, flat_curve, option_model):
        option = BondOptionSpec(2.0, 5.0, 0.93)
        exact = bond_call_price(option, option_model, flat_curve).price
        price, se = price_option_mc(option, option_model, flat_curve, b_plan(2.0, antithetic=True))
        assert abs(price - exact) <= 3.0 * se

    def test_requires_measure_b(self, flat_curve, option_model):
        with pytest.raises(DomainError):
            price_option_mc(BondOptionSpec(2.0, 5.0, 0.9), option_model, flat_curve, q_plan())

    @pytest.mark.slow
    def test_strike_scenario_matches_analytic_prices(self):
        scenario = load_scenario(SCENARIOS / "bond_option_strikes.yaml")
        curve, model = scenario.curve.build(), scenario.model.build()
        calls = [item for item in scenario.run.price.instruments
                 if item.type is InstrumentType.CALL and item.mc_paths]
        assert [item.K for item in calls] == STRIKES
        for item in calls:
            exact = bond_call_price(item.option(), model, curve).price
            plan = b_plan(item.t, n_paths=item.mc_paths, seed=scenario.seed, antithetic=item.antithetic)
            price, se = price_option_mc(item.option(), model, curve, plan)
            assert se <= 1e-4
            assert abs(price - exact) <= 3.0 * se


class TestInformationUnderB:

    @pytest.mark.parametrize("t", [0.5, 2.0])
    def test_variance_of_average_information(self, t):
        xi = MonteCarloEngine().sample_information(b_plan(t, n_paths=1_000_000, seed=31), t)
        assert xi.shape == (1_000_000,)
        assert abs(np.mean(xi / t)) < 3.0 * np.sqrt(1.0 / t / 1e6) + 1e-12
        assert np.isclose(np.var(xi / t) * t, 1.0, rtol=0.01)

    def test_requires_measure_b(self):
        with pytest.raises(DomainError):
            MonteCarloEngine().sample_information(q_plan(), 1.0)


class TestDiagnostics:

    def test_reports_are_produced(self, flat_curve, paths_model):
        plan = q_plan(n_paths=300, horizon=1.0, forward_maturity=5.0, coarse=True)
        reports = MonteCarloEngine().diagnose(plan, paths_model, flat_curve)
        assert [r.name for r in reports] == ["innovations", "martingale", "forward_volatility"]
        martingale = reports[1]
        assert martingale.check("kernel_gap_t=1").value < 0.05
        assert np.isfinite(martingale.check("discounted_bond_t=1").value)
        assert reports[0].check("qv_ratio").standard_error > 0.0

    def test_zero_sigma_martingale_is_exact(self, flat_curve, deterministic_model):
        bundles = simulate_q(q_plan(n_paths=200, coarse=True), deterministic_model, flat_curve)
        report = martingale_diagnostics(bundles, 5.0, [1.0, 2.0])
        for t in ("1", "2"):
            assert report.check(f"discounted_bond_t={t}").passed
            assert report.check(f"density_mean_t={t}").passed
            assert report.check(f"kernel_gap_t={t}").value < 1e-10

    def test_too_few_survivors(self, flat_curve, paths_model):
        bundles = simulate_q(q_plan(n_paths=20), paths_model, flat_curve)
        with pytest.raises(DiagnosticError):
            innovations_diagnostics(bundles)
        with pytest.raises(DiagnosticError):
            innovations_diagnostics([])

    @pytest.mark.slow
    def test_residual_variance_halves_with_step(self, flat_curve, paths_model):
        rates = []
        for dt in (0.02, 0.01):
            plan = SimulationPlan(n_paths=4000, dt=dt, horizon=1.0, seed=77, reference_maturity=5.0, workers=4)
            acc = MartingaleAccumulator(5.0, (1.0,))
            for bundle in simulate_q(plan, paths_model, flat_curve):
                acc.add(bundle)
            rates.append(acc.residual_variance_rate)
        assert 1.6 <= rates[0] / rates[1] <= 2.4

    @pytest.mark.slow
    def test_full_diagnostics_pass(self, flat_curve, paths_model):
        plan = SimulationPlan(
            n_paths=10000, dt=0.002, horizon=2.0, seed=20240101, reference_maturity=5.0,
            forward_maturity=5.0, coarse=True, workers=4,
        )
        reports = MonteCarloEngine().diagnose(plan, paths_model, flat_curve, [1.0, 2.0])
        assert all(report.passed for report in reports)

    @pytest.mark.slow
    def test_wrong_drift_is_detected(self, flat_curve, paths_model):
        plan = SimulationPlan(
            n_paths=10000, dt=0.002, horizon=2.0, seed=20240101, reference_maturity=5.0,
            coarse=True, drift_scale=1.1, workers=4,
        )
        reports = MonteCarloEngine().diagnose(plan, paths_model, flat_curve, [1.0, 2.0])
        assert not all(report.passed for report in reports)


class TestGamma:

    def test_paths(self, flat_curve, gamma_model):
        plan = SimulationPlan(n_paths=30, dt=0.5, horizon=4.0, seed=11, reference_maturity=4.0)
        result = simulate_gamma(plan, gamma_model, flat_curve, oracle_paths=2, oracle_samples=20000)
        bundle = result.bundles[0]
        assert np.all(np.diff(bundle.xi, axis=1) >= 0.0)
        assert np.allclose(bundle.bond[:, 0], np.exp(-0.08), rtol=1e-10)
        assert len(result.oracle) == 2
        for item in result.oracle:
            assert item.t == 2.0
            assert item.quadrature is not None
            assert 0.0 < item.estimate < 1.0

    def test_oracle_at_origin(self, flat_curve, gamma_model):
        estimate = gamma_weight_oracle(flat_curve, gamma_model, 0.0, 0.0, 5.0, 50000, seed=1)
        assert not estimate.degenerate
        assert estimate.effective_sample_size == pytest.approx(50000.0)
        assert abs(estimate.estimate - np.exp(-0.1)) <= 3.0 * estimate.standard_error

    def test_small_sample_is_degenerate(self, flat_curve, gamma_model):
        estimate = gamma_weight_oracle(flat_curve, gamma_model, 1.0, 0.5, 5.0, 50, seed=1)
        assert estimate.degenerate

    def test_brownian_model_rejected(self, flat_curve, paths_model):
        with pytest.raises(UnsupportedModelError):
            simulate_gamma(q_plan(), paths_model, flat_curve)
        with pytest.raises(UnsupportedModelError):
            gamma_oracle_grid(flat_curve, paths_model, [1.0], 5.0)

    def test_oracle_grid_layout(self, flat_curve, gamma_model):
        estimates = gamma_oracle_grid(flat_curve, gamma_model, [1.0, 2.0], 5.0, quantiles=[0.25, 0.75],
                                      n_paths=2000, oracle_samples=5000, seed=3)
        assert [item.t for item in estimates] == [1.0, 1.0, 2.0, 2.0]
        assert estimates[0].xi < estimates[1].xi
        assert all(item.quadrature is not None and item.maturity == 5.0 for item in estimates)
        with pytest.raises(DomainError):
            gamma_oracle_grid(flat_curve, gamma_model, [6.0], 5.0)
        with pytest.raises(DomainError):
            gamma_oracle_grid(flat_curve, gamma_model, [1.0], 5.0, quantiles=[1.0])

    @pytest.mark.slow
    def test_oracle_grid_matches_quadrature(self):
        curve = FlatCurve(0.025)
        model = ModelSpec.gamma(0.1, PhiFunction.exp_decay(0.02))
        start = ConditionalDensityView(curve, model, MarketState.initial())
        assert abs(bond_price(start, 10.0) - np.exp(-0.25)) < 1e-9
        estimates = gamma_oracle_grid(curve, model, [2.0, 5.0], 10.0, oracle_samples=200_000, seed=11)
        assert len(estimates) == 10
        for item in estimates:
            assert not item.degenerate
            assert abs(item.quadrature - item.estimate) <= 3.0 * item.standard_error
