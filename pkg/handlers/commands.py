#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Обработчики подкоманд CLI: curve, simulate, price, diagnose.

Каждый обработчик получает проверенный сценарий, пишет CSV в выходной
каталог, печатает таблицу в stdout и возвращает код возврата.
"""
import logging
from typing import Callable, Dict, List, Optional, TextIO

import numpy as np
import pandas as pd

from core.exceptions import (
    DiagnosticError,
    DomainError,
    ModelError,
    NumericalError,
    RangeError,
    ConjectureViolationError,
    HorizonError,
)
from core.pricer import ConditionalDensityView, bond_price
from models.enums import ExitCode, InstrumentType, Measure, PricingMethod
from models.information import ModelSpec
from models.instruments import OptionQuote
from models.scenario import InstrumentBlock, Scenario
from models.simulation import PathBundle, SimulationPlan
from services.data_manager import DataManager
from services.derivatives import derivatives
from services.monte_carlo import monte_carlo
from utils.formatters import (
    curve_frame,
    diagnostics_frame,
    format_report,
    format_table,
    path_frames,
    quotes_frame,
)

logger = logging.getLogger(__name__)


def exit_code_for(error: Exception) -> ExitCode:
    """Перевод исключения модели в код возврата"""
    if isinstance(error, DiagnosticError):
        return ExitCode.DIAGNOSTIC_FAILURE
    if isinstance(error, (NumericalError, RangeError, ConjectureViolationError, HorizonError)):
        return ExitCode.NUMERIC_FAILURE
    if isinstance(error, (DomainError, ModelError)):
        return ExitCode.SCENARIO_ERROR
    raise error


def _store(scenario: Scenario) -> DataManager:
    return DataManager(scenario.output.directory, scenario.output.precision)


def _emit(text: str, stream: Optional[TextIO]):
    if stream is not None:
        stream.write(text if text.endswith("\n") else text + "\n")


# -------------------------------------------------
# curve
# -------------------------------------------------
def curve_command(scenario: Scenario, stream: Optional[TextIO] = None) -> ExitCode:
    """(T, P_0T, f_0T, rho_0(T)) на сетке сроков"""
    run = scenario.require("curve")
    curve = scenario.curve.build()
    store = _store(scenario)
    frame = curve_frame(curve, run.grid())
    store.save_frame("curve.csv", frame)
    _emit(format_table(frame, store.precision), stream)
    logger.info(f"📈 Кривая {curve.describe()}: {len(frame)} сроков")
    return ExitCode.OK


# -------------------------------------------------
# simulate
# -------------------------------------------------
def _path_summary(bundles: List[PathBundle]) -> pd.DataFrame:
    alive = np.concatenate([b.alive for b in bundles])
    bond = np.concatenate([b.bond for b in bundles])
    rate = np.concatenate([b.short_rate for b in bundles])
    with np.errstate(invalid="ignore"):
        counts = alive.sum(axis=0)
        bond_mean = np.where(counts > 0, np.nansum(np.where(alive, bond, 0.0), axis=0) / np.maximum(counts, 1), np.nan)
        rate_mean = np.where(counts > 0, np.nansum(np.where(alive, rate, 0.0), axis=0) / np.maximum(counts, 1), np.nan)
    return pd.DataFrame({
        "t": bundles[0].times,
        "alive": counts,
        "P_mean": bond_mean,
        "r_mean": rate_mean,
    })


def simulate_command(scenario: Scenario, stream: Optional[TextIO] = None) -> ExitCode:
    """Пути (t, xi, P_{t,T*}, r, alive); для гамма-модели ещё проверка оракулом весов"""
    run = scenario.require("simulate")
    curve = scenario.curve.build()
    model = scenario.model.build()
    plan = run.plan(scenario.seed, Measure.Q)
    store = _store(scenario)

    if model.is_brownian:
        bundles = monte_carlo.simulate_q(plan, model, curve)
    else:
        result = monte_carlo.simulate_gamma(
            plan, model, curve, oracle_paths=run.oracle_paths, oracle_samples=run.oracle_samples,
        )
        bundles = result.bundles
        estimates = list(result.oracle)
        if run.oracle_grid is not None:
            grid = run.oracle_grid
            estimates += monte_carlo.gamma_oracle_grid(
                curve, model, grid.times, plan.bond_maturity, quantiles=grid.quantiles,
                n_paths=grid.n_paths, oracle_samples=grid.samples, seed=scenario.seed,
            )
        oracle = pd.DataFrame([{
            "t": item.t,
            "xi": item.xi,
            "T": item.maturity,
            "estimate": item.estimate,
            "standard_error": item.standard_error,
            "quadrature": item.quadrature,
            "effective_sample_size": item.effective_sample_size,
            "within_3se": int(item.within_3se),
            "degenerate": int(item.degenerate),
        } for item in estimates], columns=[
            "t", "xi", "T", "estimate", "standard_error", "quadrature",
            "effective_sample_size", "within_3se", "degenerate",
        ])
        store.save_frame("oracle.csv", oracle)
        if not oracle.empty:
            _emit(format_table(oracle, store.precision), stream)

    if run.write_paths:
        store.save_frames("paths", path_frames(bundles))
    summary = _path_summary(bundles)
    store.save_frame("simulate.csv", summary)
    _emit(format_table(summary, store.precision), stream)
    logger.info(f"🎲 Записано путей: {plan.n_paths}, шагов: {plan.n_steps}")
    return ExitCode.OK


# -------------------------------------------------
# price
# -------------------------------------------------
def _bond_quote(item: InstrumentBlock, model: ModelSpec, curve) -> OptionQuote:
    view = ConditionalDensityView(curve, model, item.state(model))
    return OptionQuote(InstrumentType.BOND, bond_price(view, item.T), PricingMethod.QUADRATURE)


def _mc_call_quote(item: InstrumentBlock, model: ModelSpec, curve, seed: int) -> OptionQuote:
    plan = SimulationPlan(
        n_paths=item.mc_paths,
        dt=item.t,
        horizon=item.t,
        seed=seed,
        measure=Measure.B,
        antithetic=item.antithetic,
    )
    price, se = monte_carlo.price_option_mc(item.option(), model, curve, plan)
    return OptionQuote(InstrumentType.CALL, price, PricingMethod.MONTE_CARLO, standard_error=se)


def _implied_quote(item: InstrumentBlock, model: ModelSpec, curve) -> OptionQuote:
    sigma = derivatives.implied_sigma(item.option(), item.observed_price, model, curve)
    return OptionQuote(InstrumentType.IMPLIED_SIGMA, sigma, PricingMethod.ANALYTIC)


PRICERS: Dict[InstrumentType, Callable[[InstrumentBlock, ModelSpec, object], OptionQuote]] = {
    InstrumentType.BOND: _bond_quote,
    InstrumentType.CALL: lambda item, model, curve: derivatives.bond_call_price(item.option(), model, curve),
    InstrumentType.PUT: lambda item, model, curve: derivatives.bond_put_price(item.option(), model, curve),
    InstrumentType.SWAPTION: lambda item, model, curve: derivatives.swaption_price(item.swaption(), model, curve),
    InstrumentType.IMPLIED_SIGMA: _implied_quote,
}


def price_command(scenario: Scenario, stream: Optional[TextIO] = None) -> ExitCode:
    """Таблица цен с меткой метода; для call с mc_paths добавляется строка Монте-Карло"""
    run = scenario.require("price")
    curve = scenario.curve.build()
    model = scenario.model.build()
    store = _store(scenario)

    quotes: List[OptionQuote] = []
    labels: List[str] = []
    for index, item in enumerate(run.instruments):
        quote = PRICERS[item.type](item, model, curve)
        quotes.append(quote)
        labels.append(item.name)
        logger.info(f"💰 {item.name}: {quote.price:.10g} ({quote.method.value})")
        if item.type is InstrumentType.CALL and item.mc_paths:
            mc = _mc_call_quote(item, model, curve, scenario.seed + index)
            quotes.append(mc)
            labels.append(item.name)
            if not quote.boundary and not mc.within(quote.price):
                logger.warning(f"⚠️ {item.name}: MC {mc.price:.8g} ± {mc.standard_error:.2g} против {quote.price:.8g}")

    frame = quotes_frame(quotes, labels)
    store.save_frame("price.csv", frame)
    _emit(format_table(frame, store.precision), stream)
    return ExitCode.OK


# -------------------------------------------------
# diagnose
# -------------------------------------------------
def diagnose_command(scenario: Scenario, stream: Optional[TextIO] = None) -> ExitCode:
    """Инновации, мартингальность, смена меры, форвардная волатильность"""
    run = scenario.require("diagnose")
    curve = scenario.curve.build()
    model = scenario.model.build()
    plan = run.plan(scenario.seed, Measure.Q)
    store = _store(scenario)

    reports = monte_carlo.diagnose(plan, model, curve, run.check_times)
    text = format_report(reports)
    store.save_text("diagnose.txt", text)
    store.save_frame("diagnose.csv", diagnostics_frame(reports))
    _emit(text, stream)
    if all(report.passed for report in reports):
        return ExitCode.OK
    logger.warning("❌ Диагностика не пройдена")
    return ExitCode.DIAGNOSTIC_FAILURE


COMMANDS: Dict[str, Callable[[Scenario, Optional[TextIO]], ExitCode]] = {
    "curve": curve_command,
    "simulate": simulate_command,
    "price": price_command,
    "diagnose": diagnose_command,
}


__all__ = [
    "exit_code_for",
    "curve_command",
    "simulate_command",
    "price_command",
    "diagnose_command",
    "COMMANDS",
]
