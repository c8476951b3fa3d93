#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Сервис оценки производных инструментов: call и put на дисконтную
облигацию, свопцион, гибридные платежи через ядро ценообразования,
вега и подразумеваемая интенсивность информации.

Под мерой B информация - броуновское движение без сноса, поэтому
eta_t = int sigma dxi ~ N(0, tau_t), а цена платежа в момент t равна
E^B[pi_t H_t]. Всё считается в координатах (eta, tau).
"""
import logging
from functools import partial
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from config.settings import config
from core.curve import DiscountCurve
from core.exceptions import (
    ConjectureViolationError,
    DomainError,
    RangeError,
    SurvivalError,
    UnsupportedModelError,
)
from core.pricer import ConditionalDensityBatch, ConditionalDensityView
from core.quad import QuadratureSpec, RootSpec, TailRule, find_root_monotone, integrate_gaussian, integrate_tail, normal_cdf, tail_rule
from core.streams import Moments, map_blocks, merge_all
from models.enums import InstrumentType, PricingMethod
from models.information import MarketState, ModelSpec
from models.instruments import BondOptionSpec, OptionQuote, SwaptionSpec

logger = logging.getLogger(__name__)

Payoff = Callable[[ConditionalDensityBatch], np.ndarray]

SIGMA_BOUNDS = (1e-4, 5.0)
SIGMA_GRID = 24
FLAT_PRICE_TOL = 1e-14
MONOTONE_TOL = 1e-12


def _require_brownian(model: ModelSpec, what: str):
    if not model.is_brownian:
        raise UnsupportedModelError(f"{what}: закрытые формулы есть только для броуновской информации")


def _rules(curve: DiscountCurve, lowers, spec: QuadratureSpec) -> Dict[float, TailRule]:
    return {float(lower): tail_rule(curve, float(lower), spec) for lower in lowers}


class DerivativesPricer:
    """Оценка опционов в модели с информацией о моменте кризиса"""

    def __init__(self, spec: Optional[QuadratureSpec] = None, root: Optional[RootSpec] = None):
        self.spec = spec or config.quadrature_spec()
        self.root = root or config.root_spec()
        logger.info("📈 DerivativesPricer инициализирован (узлов квадратуры: %d)", self.spec.nodes)

    # ---------- границы ----------
    @staticmethod
    def _call_boundary(option: BondOptionSpec, curve: DiscountCurve, tau: float) -> Optional[OptionQuote]:
        t, T, K = option.option_maturity, option.bond_maturity, option.strike
        P0t, P0T = curve.discount(t), curve.discount(T)
        if K <= 0.0:
            # платёж положителен почти наверное: линейность ожидания
            return OptionQuote(InstrumentType.CALL, P0T - K * P0t, PricingMethod.BOUNDARY, boundary=True)
        if K >= 1.0:
            return OptionQuote(InstrumentType.CALL, 0.0, PricingMethod.BOUNDARY, boundary=True)
        if tau <= 0.0:
            return OptionQuote(InstrumentType.CALL, max(P0T - K * P0t, 0.0), PricingMethod.ANALYTIC)
        return None

    # ---------- call на облигацию ----------
    def critical_eta(self, option: BondOptionSpec, model: ModelSpec, curve: DiscountCurve) -> float:
        """eta*, при котором P_tT = K; P_tT монотонна по eta"""
        t, T, K = option.option_maturity, option.bond_maturity, option.strike
        tau = model.integrated_variance(t)
        scale = np.sqrt(t / tau)

        def gap(eta: float) -> float:
            state = MarketState(t=t, xi=eta * scale, eta=eta, tau=tau)
            view = ConditionalDensityView(curve, model, state, self.spec)
            return view.log_tail_mass(T) - view.log_tail_mass(t) - np.log(K)

        sd = np.sqrt(tau)
        return find_root_monotone(gap, (-sd, sd), self.root)

    def bond_call_price(self, option: BondOptionSpec, model: ModelSpec, curve: DiscountCurve) -> OptionQuote:
        """
        C = int_T rho_0 N(s (tau phi - eta*) / sqrt(tau)) - K int_t rho_0 N(s (tau phi - eta*) / sqrt(tau)),
        s = +1 для возрастающей phi и -1 для убывающей.
        """
        _require_brownian(model, "Опцион на облигацию")
        t, T, K = option.option_maturity, option.bond_maturity, option.strike
        tau = model.integrated_variance(t)
        boundary = self._call_boundary(option, curve, tau)
        if boundary is not None:
            return boundary

        eta_star = self.critical_eta(option, model, curve)
        sign = 1.0 if model.phi.is_increasing else -1.0
        root_tau = np.sqrt(tau)

        def exercise(x: np.ndarray) -> np.ndarray:
            return normal_cdf(sign * (tau * model.phi.raw(x) - eta_star) / root_tau)

        bond_leg = integrate_tail(exercise, curve, T, self.spec)
        cash_leg = integrate_tail(exercise, curve, t, self.spec)
        price = float(max(bond_leg - K * cash_leg, 0.0))
        xi_star = eta_star * np.sqrt(t / tau)
        logger.debug("💡 call t=%g T=%g K=%g: xi*=%.10g, C=%.12g", t, T, K, xi_star, price)
        return OptionQuote(
            InstrumentType.CALL, price, PricingMethod.ANALYTIC, critical_value=float(xi_star),
            details={"bond_leg": float(bond_leg), "cash_leg": float(cash_leg)},
        )

    def bond_call_price_quadrature(self, option: BondOptionSpec, model: ModelSpec, curve: DiscountCurve) -> OptionQuote:
        """E^B[(int_T p_t - K int_t p_t)^+] гауссовой квадратурой по eta без поиска корня"""
        _require_brownian(model, "Опцион на облигацию")
        t, T, K = option.option_maturity, option.bond_maturity, option.strike
        tau = model.integrated_variance(t)
        boundary = self._call_boundary(option, curve, tau)
        if boundary is not None:
            return boundary
        rules = _rules(curve, (t, T), self.spec)

        def payoff(eta: np.ndarray) -> np.ndarray:
            batch = ConditionalDensityBatch(curve, model, t, eta=np.atleast_1d(eta), spec=self.spec, rules=rules)
            return np.maximum(np.exp(batch.log_tail_mass(T)) - K * np.exp(batch.log_tail_mass(t)), 0.0)

        price = float(integrate_gaussian(payoff, 0.0, tau, self.spec, kinked=True))
        return OptionQuote(InstrumentType.CALL, price, PricingMethod.QUADRATURE)

    def bond_put_price(self, option: BondOptionSpec, model: ModelSpec, curve: DiscountCurve) -> OptionQuote:
        """Паритет: P = C - (P_0T - K P_0t)"""
        call = self.bond_call_price(option, model, curve)
        forward = curve.discount(option.bond_maturity) - option.strike * curve.discount(option.option_maturity)
        return OptionQuote(
            InstrumentType.PUT, max(call.price - forward, 0.0), call.method,
            boundary=call.boundary, critical_value=call.critical_value,
        )

    # ---------- свопцион ----------
    def swaption_price(self, swaption: SwaptionSpec, model: ModelSpec, curve: DiscountCurve) -> OptionQuote:
        """
        E^B[(int_t^{T_n} p_t - K sum_i int_{T_i} p_t)^+]: скобка обрезается
        в каждом узле гауссовой квадратуры, корни не ищутся.
        """
        _require_brownian(model, "Свопцион")
        t, dates, K = swaption.option_maturity, swaption.payment_dates, swaption.strike
        deterministic = curve.discount(t) - curve.discount(swaption.final_date) - K * sum(curve.discount(T) for T in dates)
        if K <= 0.0:
            return OptionQuote(InstrumentType.SWAPTION, deterministic, PricingMethod.BOUNDARY, boundary=True)
        tau = model.integrated_variance(t)
        if tau <= 0.0:
            return OptionQuote(InstrumentType.SWAPTION, max(deterministic, 0.0), PricingMethod.ANALYTIC)
        rules = _rules(curve, (t,) + dates, self.spec)

        def bracket(eta: np.ndarray) -> np.ndarray:
            batch = ConditionalDensityBatch(curve, model, t, eta=np.atleast_1d(eta), spec=self.spec, rules=rules)
            fixed = sum(np.exp(batch.log_tail_mass(T)) for T in dates)
            floating = np.exp(batch.log_tail_mass(t)) - np.exp(batch.log_tail_mass(swaption.final_date))
            return np.maximum(floating - K * fixed, 0.0)

        price = float(integrate_gaussian(bracket, 0.0, tau, self.spec, kinked=True))
        return OptionQuote(InstrumentType.SWAPTION, price, PricingMethod.QUADRATURE)

    # ---------- гибридные платежи ----------
    def hybrid_price(
        self,
        payoff: Payoff,
        T: float,
        model: ModelSpec,
        curve: DiscountCurve,
        state: MarketState,
        n_paths: int = 100_000,
        seed: int = 0,
        antithetic: bool = False,
        coarse: bool = False,
    ) -> OptionQuote:
        """
        H_tT = E^B[pi_T H_T | F_t] / pi_t. payoff получает ConditionalDensityBatch
        в момент T и возвращает массив значений по путям.
        """
        if not model.is_brownian:
            raise UnsupportedModelError("Гибридная оценка под B определена только для броуновской информации")
        if not state.alive:
            raise SurvivalError(f"Кризис уже наступил к моменту t={state.t:g}")
        if not T >= state.t:
            raise DomainError(f"T={T:g} раньше t={state.t:g}")
        spec = config.quadrature_spec(coarse=coarse)
        rules = _rules(curve, (state.t, T), spec)
        start = ConditionalDensityBatch(curve, model, state.t, eta=np.array([state.eta]), spec=spec, rules=rules)
        log_kernel_t = float(start.log_pricing_kernel()[0])
        spread = np.sqrt(max(model.integrated_variance(T) - model.integrated_variance(state.t), 0.0))

        def deflated(eta_T: np.ndarray) -> np.ndarray:
            batch = ConditionalDensityBatch(curve, model, T, eta=eta_T, spec=spec, rules=rules)
            return np.exp(batch.log_pricing_kernel() - log_kernel_t) * np.asarray(payoff(batch), dtype=float)

        def worker(rng, block, size):
            if antithetic:
                z = rng.standard_normal((size + 1) // 2)
                return Moments.of(0.5 * (deflated(state.eta + spread * z) + deflated(state.eta - spread * z)))
            return Moments.of(deflated(state.eta + spread * rng.standard_normal(size)))

        total = merge_all(map_blocks(worker, seed, n_paths, config.mc_block_size, config.mc_workers))
        logger.info("🧮 Гибридный платёж: %.10g ± %.2g", total.mean, total.standard_error)
        return OptionQuote(
            InstrumentType.HYBRID, total.mean, PricingMethod.MONTE_CARLO,
            standard_error=total.standard_error, details={"samples": total.n},
        )

    # ---------- вега и подразумеваемая sigma ----------
    def vega(self, option: BondOptionSpec, model: ModelSpec, curve: DiscountCurve) -> float:
        """dC/dsigma центральной разностью с шагом max(1e-4, 1e-4 sigma)"""
        sigma = model.sigma
        h = max(1e-4, 1e-4 * sigma)

        def price(s: float) -> float:
            return self.bond_call_price(option, model.with_sigma(s), curve).price

        if sigma < h:
            return (price(sigma + h) - price(sigma)) / h
        return (price(sigma + h) - price(sigma - h)) / (2.0 * h)

    def implied_sigma(
        self,
        option: BondOptionSpec,
        observed_price: float,
        model_template: ModelSpec,
        curve: DiscountCurve,
        bounds: Tuple[float, float] = SIGMA_BOUNDS,
        grid_size: int = SIGMA_GRID,
    ) -> float:
        """
        sigma*, при которой C(sigma*) = observed_price. Сначала цена
        сканируется на логарифмической сетке: немонотонность C(sigma)
        не прячется, а возбуждает ConjectureViolationError.
        """
        _require_brownian(model_template, "Подразумеваемая sigma")
        lo, hi = bounds
        if not 0.0 < lo < hi:
            raise DomainError(f"Некорректные границы sigma: {bounds}")
        grid = np.geomspace(lo, hi, grid_size)

        def price(s: float) -> float:
            return self.bond_call_price(option, model_template.with_sigma(s), curve).price

        prices = np.array([price(s) for s in grid])
        steps = np.diff(prices)
        if np.any(steps > MONOTONE_TOL) and np.any(steps < -MONOTONE_TOL):
            raise ConjectureViolationError(
                f"Цена опциона немонотонна по sigma (K={option.strike:g}): {np.round(prices, 12).tolist()}"
            )
        low, high = float(prices.min()), float(prices.max())
        if high - low <= FLAT_PRICE_TOL or not low < observed_price < high:
            raise RangeError(
                f"Цена {observed_price:.12g} вне достижимого диапазона ({low:.12g}, {high:.12g}) "
                f"при sigma в [{lo:g}, {hi:g}]"
            )
        above = (prices - observed_price) > 0.0
        cell = int(np.flatnonzero(above[:-1] != above[1:])[0])
        sigma = find_root_monotone(lambda s: price(s) - observed_price, (grid[cell], grid[cell + 1]), self.root)
        logger.info("🎯 Подразумеваемая sigma для K=%g: %.12g", option.strike, sigma)
        return sigma


# -------------------------------------------------
# Функциональный интерфейс
# -------------------------------------------------
derivatives = DerivativesPricer()


def bond_call_price(option: BondOptionSpec, model: ModelSpec, curve: DiscountCurve) -> OptionQuote:
    return derivatives.bond_call_price(option, model, curve)


def bond_call_price_quadrature(option: BondOptionSpec, model: ModelSpec, curve: DiscountCurve) -> OptionQuote:
    return derivatives.bond_call_price_quadrature(option, model, curve)


def bond_put_price(option: BondOptionSpec, model: ModelSpec, curve: DiscountCurve) -> OptionQuote:
    return derivatives.bond_put_price(option, model, curve)


def swaption_price(swaption: SwaptionSpec, model: ModelSpec, curve: DiscountCurve) -> OptionQuote:
    return derivatives.swaption_price(swaption, model, curve)


def hybrid_price(payoff: Payoff, T: float, model: ModelSpec, curve: DiscountCurve, state: MarketState, **kwargs) -> OptionQuote:
    return derivatives.hybrid_price(payoff, T, model, curve, state, **kwargs)


def vega(option: BondOptionSpec, model: ModelSpec, curve: DiscountCurve) -> float:
    return derivatives.vega(option, model, curve)


def implied_sigma(
    option: BondOptionSpec,
    observed_price: float,
    model_template: ModelSpec,
    curve: DiscountCurve,
    **kwargs,
) -> float:
    return derivatives.implied_sigma(option, observed_price, model_template, curve, **kwargs)


def bond_payoff(maturity: float, strike: float) -> Payoff:
    """(P_{T,T'} - K)^+ для hybrid_price"""
    return partial(_bond_payoff, maturity=maturity, strike=strike)


def _bond_payoff(batch: ConditionalDensityBatch, maturity: float, strike: float) -> np.ndarray:
    return np.maximum(batch.bond_price(maturity) - strike, 0.0)


def swaption_payoff(swaption: SwaptionSpec) -> Payoff:
    """(1 - P_{t,T_n} - K sum_i P_{t,T_i})^+ в момент экспирации для hybrid_price"""
    return partial(_swaption_payoff, dates=swaption.payment_dates, strike=swaption.strike)


def _swaption_payoff(batch: ConditionalDensityBatch, dates: Tuple[float, ...], strike: float) -> np.ndarray:
    fixed = sum(batch.bond_price(T) for T in dates)
    return np.maximum(1.0 - batch.bond_price(dates[-1]) - strike * fixed, 0.0)


__all__ = [
    "DerivativesPricer",
    "derivatives",
    "bond_call_price",
    "bond_call_price_quadrature",
    "bond_put_price",
    "swaption_price",
    "hybrid_price",
    "vega",
    "implied_sigma",
    "bond_payoff",
    "swaption_payoff",
]
