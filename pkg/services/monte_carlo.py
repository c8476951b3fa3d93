#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Сервис Монте-Карло: пути под Q, оценка опционов под B, диагностика
инноваций и мартингальности, гамма-модель с оракулом весов важности.

Пути считаются блоками; у каждого блока свой поток Philox, результаты
сливаются в порядке блоков. Диагностики устроены как ассоциативные
накопители, поэтому большие прогоны не держат пути в памяти.
"""
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import config
from core.curve import DiscountCurve
from core.exceptions import DiagnosticError, DomainError, UnsupportedModelError
from core.information import advance_paths, draw_crisis_time, draw_gamma_increments
from core.pricer import ConditionalDensityBatch, ConditionalDensityView, bond_price
from core.quad import QuadratureSpec, TailRule, tail_rule
from core.streams import Moments, block_rng, map_blocks, merge_all
from models.enums import Measure
from models.information import MarketState, ModelSpec
from models.instruments import BondOptionSpec
from models.simulation import DiagnosticReport, GammaSimulation, OracleEstimate, PathBundle, SimulationPlan

logger = logging.getLogger(__name__)

TIME_EPS = 1e-12
ORACLE_STREAM_OFFSET = 1 << 40
GRID_STREAM_OFFSET = 1 << 41
GRID_STREAM_STRIDE = 1 << 20
DEFAULT_ORACLE_QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


def _uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.uniform(np.finfo(float).tiny, 1.0, size)


def _masked(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, values, np.nan)


# -------------------------------------------------
# Накопители диагностики
# -------------------------------------------------
@dataclass
class InnovationsAccumulator:
    """Квадратичная вариация, среднее, дисперсия и автокорреляция приращений W"""
    horizon: float
    qv: Moments = field(default_factory=Moments)
    increments: Moments = field(default_factory=Moments)
    squares: Moments = field(default_factory=Moments)
    lagged: Moments = field(default_factory=Moments)

    def add(self, bundle: PathBundle) -> "InnovationsAccumulator":
        end = bundle.time_index(self.horizon)
        dt = np.diff(bundle.times)[:end]
        dW = np.diff(bundle.innovation, axis=1)[:, :end]
        alive_next = bundle.alive[:, 1:end + 1]
        u = dW / np.sqrt(dt)[None, :]

        survivors = bundle.alive[:, end]
        self.qv = self.qv.merge(Moments.of(np.sum(dW[survivors] ** 2, axis=1) / bundle.times[end]))
        self.increments = self.increments.merge(Moments.of(u[alive_next]))
        self.squares = self.squares.merge(Moments.of(u[alive_next] ** 2))
        if end > 1:
            pairs = bundle.alive[:, 2:end + 1]
            self.lagged = self.lagged.merge(Moments.of((u[:, :-1] * u[:, 1:])[pairs]))
        return self

    def merge(self, other: "InnovationsAccumulator") -> "InnovationsAccumulator":
        return InnovationsAccumulator(
            horizon=self.horizon,
            qv=self.qv.merge(other.qv),
            increments=self.increments.merge(other.increments),
            squares=self.squares.merge(other.squares),
            lagged=self.lagged.merge(other.lagged),
        )

    def report(self, min_paths: Optional[int] = None) -> DiagnosticReport:
        min_paths = config.min_surviving_paths if min_paths is None else min_paths
        if self.qv.n < min_paths:
            raise DiagnosticError(f"Выжило {self.qv.n} путей, нужно не меньше {min_paths}")
        report = DiagnosticReport(name="innovations", n_paths=self.qv.n)
        report.add("qv_ratio", self.qv.mean, 1.0, max(0.01, 3.0 * self.qv.standard_error), self.qv.standard_error)
        report.add(
            "increment_mean", self.increments.mean, 0.0,
            3.0 * self.increments.standard_error + 1e-12, self.increments.standard_error,
        )
        report.add(
            "increment_variance", self.squares.mean, 1.0,
            max(0.01, 3.0 * self.squares.standard_error), self.squares.standard_error,
        )
        if self.lagged.n:
            scale = self.squares.mean
            se = self.lagged.standard_error / scale
            report.add("lag1_autocorrelation", self.lagged.mean / scale, 0.0, 3.0 * se + 1e-12, se)
        report.stats.update({"horizon": self.horizon, "increments": float(self.increments.n)})
        return report


@dataclass
class MartingaleAccumulator:
    """
    Дисконтированная облигация, плотность смены меры и остаток
    динамики dP/P = r dt + sigma Sigma dW на выживших путях
    """
    reference_maturity: float
    check_times: Tuple[float, ...]
    target: float = float("nan")
    discounted: Dict[float, Moments] = field(default_factory=dict)
    density: Dict[float, Moments] = field(default_factory=dict)
    density_xi: Dict[float, Moments] = field(default_factory=dict)
    filtered: Dict[float, Moments] = field(default_factory=dict)
    kernel_gap: Dict[float, Moments] = field(default_factory=dict)
    residual: Moments = field(default_factory=Moments)
    residual_square: float = 0.0
    elapsed: float = 0.0

    def add(self, bundle: PathBundle) -> "MartingaleAccumulator":
        if abs(bundle.reference_maturity - self.reference_maturity) > TIME_EPS:
            raise DomainError(
                f"Пути посчитаны для T*={bundle.reference_maturity:g}, а не {self.reference_maturity:g}"
            )
        self.target = float(bundle.bond[0, 0])
        for t in self.check_times:
            k = bundle.time_index(t)
            alive = bundle.alive[:, k]
            discounted = np.exp(-bundle.int_rate[alive, k]) * bundle.bond[alive, k]
            density = np.exp(bundle.log_density[alive, k])
            gap = bundle.log_kernel[alive, k] + bundle.int_rate[alive, k] + bundle.log_density[alive, k]
            self.discounted[t] = self.discounted.get(t, Moments()).merge(Moments.of(discounted))
            self.density[t] = self.density.get(t, Moments()).merge(Moments.of(density))
            self.density_xi[t] = self.density_xi.get(t, Moments()).merge(Moments.of(density * bundle.xi[alive, k]))
            self.filtered[t] = self.filtered.get(t, Moments()).merge(
                Moments.of(np.where(alive, bundle.bond[:, k], 0.0))
            )
            self.kernel_gap[t] = self.kernel_gap.get(t, Moments()).merge(Moments.of(np.abs(gap)))

        end = np.searchsorted(bundle.times, self.reference_maturity + TIME_EPS, side="right") - 1
        if end >= 1:
            dt = np.diff(bundle.times)[:end]
            P = bundle.bond[:, :end + 1]
            dW = np.diff(bundle.innovation, axis=1)[:, :end]
            drift = bundle.short_rate[:, :end] * dt[None, :]
            diffusion = bundle.rate[None, :end] * bundle.bond_vol[:, :end] * dW
            residual = np.diff(P, axis=1) / P[:, :-1] - drift - diffusion
            ok = bundle.alive[:, 1:end + 1]
            self.residual = self.residual.merge(Moments.of(residual[ok]))
            self.residual_square += float(np.sum(residual[ok] ** 2))
            self.elapsed += float(np.sum(np.broadcast_to(dt[None, :], ok.shape)[ok]))
        return self

    def merge(self, other: "MartingaleAccumulator") -> "MartingaleAccumulator":
        def merged(a: Dict[float, Moments], b: Dict[float, Moments]) -> Dict[float, Moments]:
            return {t: a.get(t, Moments()).merge(b.get(t, Moments())) for t in set(a) | set(b)}

        return MartingaleAccumulator(
            reference_maturity=self.reference_maturity,
            check_times=self.check_times,
            target=other.target if np.isnan(self.target) else self.target,
            discounted=merged(self.discounted, other.discounted),
            density=merged(self.density, other.density),
            density_xi=merged(self.density_xi, other.density_xi),
            filtered=merged(self.filtered, other.filtered),
            kernel_gap=merged(self.kernel_gap, other.kernel_gap),
            residual=self.residual.merge(other.residual),
            residual_square=self.residual_square + other.residual_square,
            elapsed=self.elapsed + other.elapsed,
        )

    @property
    def residual_variance_rate(self) -> float:
        """sum R^2 / sum dt: убывает пропорционально шагу сетки"""
        return self.residual_square / self.elapsed if self.elapsed > 0.0 else float("nan")

    def report(self, min_paths: Optional[int] = None) -> DiagnosticReport:
        min_paths = config.min_surviving_paths if min_paths is None else min_paths
        survivors = min(m.n for m in self.discounted.values()) if self.discounted else 0
        if survivors < min_paths:
            raise DiagnosticError(f"Выжило {survivors} путей, нужно не меньше {min_paths}")
        report = DiagnosticReport(name="martingale", n_paths=survivors)
        for t in self.check_times:
            z, m, mx, flt = self.discounted[t], self.density[t], self.density_xi[t], self.filtered[t]
            report.add(f"discounted_bond_t={t:g}", z.mean, self.target, 3.0 * z.standard_error + 1e-10, z.standard_error)
            report.add(f"density_mean_t={t:g}", m.mean, 1.0, 3.0 * m.standard_error + 1e-10, m.standard_error)
            report.add(f"density_xi_t={t:g}", mx.mean, 0.0, 3.0 * mx.standard_error + 1e-10, mx.standard_error)
            report.add(f"filter_t={t:g}", flt.mean, self.target, 3.0 * flt.standard_error + 1e-10, flt.standard_error)
            report.add(f"kernel_gap_t={t:g}", self.kernel_gap[t].mean, 0.0, 0.05, informational=True)
        if self.residual.n:
            report.add(
                "bond_dynamics_residual", self.residual.mean, 0.0,
                3.0 * self.residual.standard_error + 1e-12, self.residual.standard_error,
            )
            report.add("residual_variance_rate", self.residual_variance_rate, 0.0, np.inf, informational=True)
        report.stats.update({"reference_maturity": self.reference_maturity, "target": self.target})
        return report


@dataclass
class ForwardVolatilityAccumulator:
    """Реализованная ковариация df с dW против sigma f (phi(T) - Phi-hat)"""
    covariation: Moments = field(default_factory=Moments)
    model_vol: Moments = field(default_factory=Moments)

    def add(self, bundle: PathBundle) -> "ForwardVolatilityAccumulator":
        df = np.diff(bundle.forward, axis=1)
        dW = np.diff(bundle.innovation, axis=1)
        dt = np.diff(bundle.times)[None, :]
        ok = bundle.alive[:, 1:] & np.isfinite(df) & np.isfinite(bundle.forward_vol[:, :-1])
        self.covariation = self.covariation.merge(Moments.of((df * dW / dt)[ok]))
        self.model_vol = self.model_vol.merge(Moments.of(np.broadcast_to(bundle.forward_vol[:, :-1], ok.shape)[ok]))
        return self

    def merge(self, other: "ForwardVolatilityAccumulator") -> "ForwardVolatilityAccumulator":
        return ForwardVolatilityAccumulator(
            covariation=self.covariation.merge(other.covariation),
            model_vol=self.model_vol.merge(other.model_vol),
        )

    def report(self, tolerance: float = 0.02) -> DiagnosticReport:
        if self.covariation.n == 0:
            raise DiagnosticError("Нет шагов с определённой форвардной ставкой")
        report = DiagnosticReport(name="forward_volatility", n_paths=self.covariation.n)
        scale = self.model_vol.mean
        ratio = self.covariation.mean / scale if scale != 0.0 else float("nan")
        se = self.covariation.standard_error / abs(scale) if scale != 0.0 else float("nan")
        report.add("realised_to_model_ratio", ratio, 1.0, max(tolerance, 3.0 * se), se)
        report.stats.update({"model_vol": scale, "realised_vol": self.covariation.mean})
        return report


# -------------------------------------------------
# Сервис
# -------------------------------------------------
class MonteCarloEngine:
    """Блочный движок Монте-Карло"""

    def __init__(self, block_size: Optional[int] = None, workers: Optional[int] = None):
        self.block_size = block_size or config.mc_block_size
        self.workers = workers or config.mc_workers
        logger.info("🎲 MonteCarloEngine: блок %d путей, потоков %d", self.block_size, self.workers)

    def _layout(self, plan: SimulationPlan) -> Tuple[int, int]:
        return plan.block_size or self.block_size, plan.workers or self.workers

    @staticmethod
    def _rules(curve: DiscountCurve, lowers: Iterable[float], spec: QuadratureSpec) -> Dict[float, TailRule]:
        # заполняется заранее: потоки только читают словарь
        return {float(lower): tail_rule(curve, float(lower), spec) for lower in set(float(v) for v in lowers)}

    def _grid_rules(self, plan: SimulationPlan, curve: DiscountCurve, spec: QuadratureSpec) -> Dict[float, TailRule]:
        lowers = list(plan.times) + [plan.bond_maturity]
        if plan.forward_maturity is not None:
            lowers.append(plan.forward_maturity)
        return self._rules(curve, lowers, spec)

    # ---------- пути под Q ----------
    def simulate_q(self, plan: SimulationPlan, model: ModelSpec, curve: DiscountCurve) -> List[PathBundle]:
        """Пути xi под Q с наблюдаемыми на сетке"""
        if plan.measure is not Measure.Q:
            raise DomainError("simulate_q требует меру Q")
        if not model.is_brownian:
            raise UnsupportedModelError("Для гамма-модели используйте simulate_gamma")
        spec = config.quadrature_spec(coarse=plan.coarse)
        rules = self._grid_rules(plan, curve, spec)
        block_size, workers = self._layout(plan)
        logger.info("🚀 Моделирование под Q: %d путей, %d шагов", plan.n_paths, plan.n_steps)
        worker = partial(self._q_block, plan=plan, model=model, curve=curve, spec=spec, rules=rules)
        return map_blocks(worker, plan.seed, plan.n_paths, block_size, workers)

    def _q_block(
        self,
        rng: np.random.Generator,
        block: int,
        size: int,
        plan: SimulationPlan,
        model: ModelSpec,
        curve: DiscountCurve,
        spec: QuadratureSpec,
        rules: Dict[float, TailRule],
    ) -> PathBundle:
        times = plan.times
        n = len(times) - 1
        T_star = plan.bond_maturity
        T_fwd = plan.forward_maturity

        x = np.asarray(draw_crisis_time(curve, _uniforms(rng, size)))
        phi_x = model.phi.raw(x)
        shape = (size, n + 1)
        xi = np.zeros(shape)
        alive = np.zeros(shape, dtype=bool)
        arrays = {name: np.full(shape, np.nan) for name in (
            "bond", "short_rate", "phi_hat", "innovation", "log_density",
            "int_rate", "bond_vol", "forward", "forward_vol", "log_kernel",
        )}
        rate = np.asarray(model.rate_at(times), dtype=float)

        cur_xi, cur_eta = np.zeros(size), np.zeros(size)
        cur_W, cur_log_m, cur_int = np.zeros(size), np.zeros(size), np.zeros(size)
        cur_alive = np.ones(size, dtype=bool)
        tau = 0.0
        for k, t in enumerate(times):
            xi[:, k] = cur_xi
            alive[:, k] = cur_alive
            batch = ConditionalDensityBatch(curve, model, t, eta=cur_eta, spec=spec, rules=rules)
            hat = batch.phi_hat(t)
            r = batch.short_rate()
            arrays["phi_hat"][:, k] = _masked(hat, cur_alive)
            arrays["short_rate"][:, k] = _masked(r, cur_alive)
            arrays["innovation"][:, k] = _masked(cur_W, cur_alive)
            arrays["log_density"][:, k] = _masked(cur_log_m, cur_alive)
            arrays["int_rate"][:, k] = _masked(cur_int, cur_alive)
            arrays["log_kernel"][:, k] = _masked(batch.log_pricing_kernel(), cur_alive)
            if t <= T_star + TIME_EPS:
                maturity = max(T_star, t)
                arrays["bond"][:, k] = _masked(batch.bond_price(maturity), cur_alive)
                arrays["bond_vol"][:, k] = _masked(batch.bond_volatility(maturity), cur_alive)
            if T_fwd is not None and t <= T_fwd:
                arrays["forward"][:, k] = _masked(batch.forward_rate(T_fwd), cur_alive)
                arrays["forward_vol"][:, k] = _masked(batch.forward_rate_volatility(T_fwd), cur_alive)
            if k == n:
                break

            dt = times[k + 1] - t
            z = rng.standard_normal(size)
            dxi, cur_xi, cur_eta, tau = advance_paths(model, t, cur_xi, cur_eta, tau, phi_x, dt, z, plan.drift_scale)
            drift = rate[k] * hat
            cur_W = cur_W + dxi - drift * dt
            cur_log_m = cur_log_m - drift * dxi + 0.5 * drift * drift * dt
            cur_int = cur_int + r * dt
            cur_alive = cur_alive & (x >= times[k + 1])

        return PathBundle(
            times=times,
            x_draw=x,
            xi=xi,
            alive=alive,
            rate=rate,
            reference_maturity=T_star,
            forward_maturity=T_fwd,
            block=block,
            **arrays,
        )

    # ---------- потоковая диагностика ----------
    def diagnose(
        self,
        plan: SimulationPlan,
        model: ModelSpec,
        curve: DiscountCurve,
        check_times: Optional[Sequence[float]] = None,
    ) -> List[DiagnosticReport]:
        """Все диагностики без хранения путей: блок -> накопители -> слияние"""
        checks = default_check_times(plan, check_times)
        keep = plan.forward_maturity is not None

        def reduce_block(bundle: PathBundle):
            innovations = InnovationsAccumulator(horizon=plan.times[-1]).add(bundle)
            martingale = MartingaleAccumulator(plan.bond_maturity, checks).add(bundle)
            forward = ForwardVolatilityAccumulator().add(bundle) if keep else None
            return innovations, martingale, forward

        spec = config.quadrature_spec(coarse=plan.coarse)
        rules = self._grid_rules(plan, curve, spec)
        block_size, workers = self._layout(plan)

        def worker(rng, block, size):
            return reduce_block(self._q_block(rng, block, size, plan, model, curve, spec, rules))

        parts = map_blocks(worker, plan.seed, plan.n_paths, block_size, workers)
        innovations, martingale, forward = parts[0]
        for part in parts[1:]:
            innovations = innovations.merge(part[0])
            martingale = martingale.merge(part[1])
            if keep:
                forward = forward.merge(part[2])
        reports = [innovations.report(), martingale.report()]
        if keep:
            reports.append(forward.report())
        for report in reports:
            logger.info("🔍 %s: %s", report.name, "OK" if report.passed else "FAIL")
        return reports

    # ---------- опцион под B ----------
    def price_option_mc(
        self,
        spec: BondOptionSpec,
        model: ModelSpec,
        curve: DiscountCurve,
        plan: SimulationPlan,
    ) -> Tuple[float, float]:
        """
        Call под B: xi_t ~ N(0, t) без путей, платёж
        (int_T rho e^(...) - K int_t rho e^(...))^+; возвращает (цена, SE).
        """
        if plan.measure is not Measure.B:
            raise DomainError("price_option_mc требует меру B")
        if not model.is_brownian:
            raise UnsupportedModelError("Оценка под B определена только для броуновской информации")
        t, T, K = spec.option_maturity, spec.bond_maturity, spec.strike
        tau = model.integrated_variance(t)
        qspec = config.quadrature_spec(coarse=plan.coarse)
        rules = self._rules(curve, (t, T), qspec)

        def payoff(eta: np.ndarray) -> np.ndarray:
            batch = ConditionalDensityBatch(curve, model, t, eta=eta, spec=qspec, rules=rules)
            return np.maximum(np.exp(batch.log_tail_mass(T)) - K * np.exp(batch.log_tail_mass(t)), 0.0)

        def worker(rng, block, size):
            if plan.antithetic:
                z = rng.standard_normal((size + 1) // 2)
                eta = np.sqrt(tau) * z
                return Moments.of(0.5 * (payoff(eta) + payoff(-eta)))
            return Moments.of(payoff(np.sqrt(tau) * rng.standard_normal(size)))

        block_size, workers = self._layout(plan)
        total = merge_all(map_blocks(worker, plan.seed, plan.n_paths, block_size, workers))
        logger.info("💰 MC цена call: %.10g ± %.2g (%d выборок)", total.mean, total.standard_error, total.n)
        return total.mean, total.standard_error

    def sample_information(self, plan: SimulationPlan, t: float) -> np.ndarray:
        """xi_t под B: N(0, t)"""
        if plan.measure is not Measure.B:
            raise DomainError("sample_information требует меру B")
        if not t > 0.0:
            raise DomainError(f"Момент t={t:g} должен быть положительным")
        block_size, workers = self._layout(plan)
        parts = map_blocks(lambda rng, block, size: np.sqrt(t) * rng.standard_normal(size),
                           plan.seed, plan.n_paths, block_size, workers)
        return np.concatenate(parts)

    # ---------- гамма-модель ----------
    def simulate_gamma(
        self,
        plan: SimulationPlan,
        model: ModelSpec,
        curve: DiscountCurve,
        oracle_paths: int = 5,
        oracle_samples: int = 200_000,
    ) -> GammaSimulation:
        """Пути xi_t = X gamma_t и проверка цены облигации оракулом весов"""
        if model.is_brownian:
            raise UnsupportedModelError("simulate_gamma требует гамма-модель")
        spec = config.quadrature_spec(coarse=plan.coarse)
        rules = self._grid_rules(plan, curve, spec)
        block_size, workers = self._layout(plan)
        worker = partial(self._gamma_block, plan=plan, model=model, curve=curve, spec=spec, rules=rules)
        bundles = map_blocks(worker, plan.seed, plan.n_paths, block_size, workers)

        k = len(plan.times) // 2
        t_check = float(plan.times[k])
        oracle: List[OracleEstimate] = []
        if 0.0 < t_check < plan.bond_maturity:
            candidates = [(b, i) for b in bundles for i in np.flatnonzero(b.alive[:, k])][:oracle_paths]
            for j, (bundle, i) in enumerate(candidates):
                xi = float(bundle.xi[i, k])
                estimate = gamma_weight_oracle(
                    curve, model, t_check, xi, plan.bond_maturity, oracle_samples,
                    seed=plan.seed, stream=ORACLE_STREAM_OFFSET + j,
                )
                view = ConditionalDensityView(curve, model, MarketState.from_xi(model, t_check, xi))
                estimate.quadrature = bond_price(view, plan.bond_maturity)
                oracle.append(estimate)
        return GammaSimulation(bundles=bundles, oracle=oracle)

    def gamma_oracle_grid(
        self,
        curve: DiscountCurve,
        model: ModelSpec,
        times: Sequence[float],
        maturity: float,
        quantiles: Sequence[float] = DEFAULT_ORACLE_QUANTILES,
        n_paths: int = 20_000,
        oracle_samples: int = 200_000,
        seed: int = 0,
    ) -> List[OracleEstimate]:
        """
        Оракул весов на сетке xi: в каждый момент t берутся квантили xi_t = X gamma_t
        по выжившим путям, в каждой точке оценка сравнивается с квадратурой.
        """
        if model.is_brownian:
            raise UnsupportedModelError("gamma_oracle_grid требует гамма-модель")
        if any(not 0.0 < q < 1.0 for q in quantiles):
            raise DomainError(f"Квантили должны лежать в (0, 1): {list(quantiles)}")
        estimates: List[OracleEstimate] = []
        for i, t in enumerate(times):
            t = float(t)
            if not 0.0 < t <= maturity:
                raise DomainError(f"Момент проверки t={t:g} вне (0, {maturity:g}]")
            rng = block_rng(seed, GRID_STREAM_OFFSET + i)
            x = np.asarray(draw_crisis_time(curve, _uniforms(rng, n_paths)))
            xi = x * draw_gamma_increments(rng, model.m, t, n_paths)
            live = x >= t
            if not np.any(live):
                raise DiagnosticError(f"Ни один путь не пережил момент t={t:g}")
            for j, level in enumerate(np.quantile(xi[live], quantiles)):
                estimate = gamma_weight_oracle(
                    curve, model, t, float(level), maturity, oracle_samples,
                    seed=seed, stream=GRID_STREAM_OFFSET + (i + 1) * GRID_STREAM_STRIDE + j,
                )
                view = ConditionalDensityView(curve, model, MarketState.from_xi(model, t, float(level)))
                estimate.quadrature = bond_price(view, maturity)
                estimates.append(estimate)
        failed = sum(not item.within_3se for item in estimates)
        logger.info("🔎 Оракул весов: %d точек, вне 3 SE: %d", len(estimates), failed)
        return estimates

    def _gamma_block(
        self,
        rng: np.random.Generator,
        block: int,
        size: int,
        plan: SimulationPlan,
        model: ModelSpec,
        curve: DiscountCurve,
        spec: QuadratureSpec,
        rules: Dict[float, TailRule],
    ) -> PathBundle:
        times = plan.times
        n = len(times) - 1
        T_star = plan.bond_maturity
        x = np.asarray(draw_crisis_time(curve, _uniforms(rng, size)))
        shape = (size, n + 1)
        xi = np.zeros(shape)
        alive = np.zeros(shape, dtype=bool)
        arrays = {name: np.full(shape, np.nan) for name in (
            "bond", "short_rate", "phi_hat", "innovation", "log_density",
            "int_rate", "bond_vol", "forward", "forward_vol", "log_kernel",
        )}
        level = np.zeros(size)
        cur_int = np.zeros(size)
        cur_alive = np.ones(size, dtype=bool)
        for k, t in enumerate(times):
            xi[:, k] = x * level
            alive[:, k] = cur_alive
            batch = ConditionalDensityBatch(curve, model, t, xi=xi[:, k], spec=spec, rules=rules)
            r = batch.short_rate()
            arrays["short_rate"][:, k] = _masked(r, cur_alive)
            arrays["int_rate"][:, k] = _masked(cur_int, cur_alive)
            arrays["log_kernel"][:, k] = _masked(batch.log_pricing_kernel(), cur_alive)
            if t <= T_star + TIME_EPS:
                arrays["bond"][:, k] = _masked(batch.bond_price(max(T_star, t)), cur_alive)
            if k == n:
                break
            dt = times[k + 1] - t
            level = level + draw_gamma_increments(rng, model.m, dt, size)
            cur_int = cur_int + r * dt
            cur_alive = cur_alive & (x >= times[k + 1])
        return PathBundle(
            times=times,
            x_draw=x,
            xi=xi,
            alive=alive,
            rate=np.full(n + 1, np.nan),
            reference_maturity=T_star,
            block=block,
            **arrays,
        )


# -------------------------------------------------
# Функциональный интерфейс
# -------------------------------------------------
monte_carlo = MonteCarloEngine()


def default_check_times(plan: SimulationPlan, check_times: Optional[Sequence[float]] = None) -> Tuple[float, ...]:
    """Моменты проверки мартингальности: 1 и 2 года, если они есть на сетке"""
    limit = min(plan.times[-1], plan.bond_maturity)
    if check_times is None:
        check_times = [t for t in (1.0, 2.0) if t <= limit + TIME_EPS]
    picked = []
    for t in check_times:
        k = int(np.argmin(np.abs(plan.times - t)))
        if abs(plan.times[k] - t) <= 1e-9 * max(1.0, t) and plan.times[k] > 0.0:
            picked.append(float(plan.times[k]))
    if picked:
        return tuple(picked)
    return (float(plan.times[plan.times <= limit + TIME_EPS][-1]),)


def simulate_q(plan: SimulationPlan, model: ModelSpec, curve: DiscountCurve) -> List[PathBundle]:
    return monte_carlo.simulate_q(plan, model, curve)


def innovations_diagnostics(samples: Iterable[PathBundle], horizon: Optional[float] = None) -> DiagnosticReport:
    """W на выживших путях: QV/t, среднее и дисперсия приращений, автокорреляция"""
    samples = list(samples)
    if not samples:
        raise DiagnosticError("Нет путей для диагностики")
    horizon = float(samples[0].times[-1]) if horizon is None else horizon
    acc = InnovationsAccumulator(horizon=horizon)
    for bundle in samples:
        acc.add(bundle)
    return acc.report()


def martingale_diagnostics(
    samples: Iterable[PathBundle],
    T_ref: float,
    check_times: Optional[Sequence[float]] = None,
) -> DiagnosticReport:
    """E[e^(-int r) P_{t,T_ref}] = P_{0,T_ref}, E[M_t] = 1, E[M_t xi_t] = 0, остаток динамики облигации"""
    samples = list(samples)
    if not samples:
        raise DiagnosticError("Нет путей для диагностики")
    times = samples[0].times
    if check_times is None:
        limit = min(times[-1], T_ref)
        check_times = [t for t in (1.0, 2.0) if t <= limit + TIME_EPS] or [float(times[times <= limit + TIME_EPS][-1])]
    acc = MartingaleAccumulator(float(T_ref), tuple(float(t) for t in check_times))
    for bundle in samples:
        acc.add(bundle)
    return acc.report()


def forward_volatility_diagnostics(samples: Iterable[PathBundle], tolerance: float = 0.02) -> DiagnosticReport:
    acc = ForwardVolatilityAccumulator()
    for bundle in samples:
        acc.add(bundle)
    return acc.report(tolerance)


def price_option_mc(
    spec: BondOptionSpec,
    model: ModelSpec,
    curve: DiscountCurve,
    plan: SimulationPlan,
) -> Tuple[float, float]:
    return monte_carlo.price_option_mc(spec, model, curve, plan)


def simulate_gamma(plan: SimulationPlan, model: ModelSpec, curve: DiscountCurve, **kwargs) -> GammaSimulation:
    return monte_carlo.simulate_gamma(plan, model, curve, **kwargs)


def gamma_oracle_grid(
    curve: DiscountCurve,
    model: ModelSpec,
    times: Sequence[float],
    maturity: float,
    **kwargs,
) -> List[OracleEstimate]:
    return monte_carlo.gamma_oracle_grid(curve, model, times, maturity, **kwargs)


def gamma_weight_oracle(
    curve: DiscountCurve,
    model: ModelSpec,
    t: float,
    xi: float,
    T: float,
    n_samples: int,
    seed: int = 0,
    stream: int = 0,
) -> OracleEstimate:
    """
    P_tT ~ sum_{X_i >= T} w_i / sum_{X_i >= t} w_i, X_i ~ rho_0,
    w_i = X_i^(-m t) exp(-xi / X_i). SE по дельта-методу.
    """
    if not T >= t:
        raise DomainError(f"T={T:g} раньше t={t:g}")
    rng = block_rng(seed, stream)
    x = np.asarray(draw_crisis_time(curve, _uniforms(rng, n_samples)))
    mt = model.m * t
    with np.errstate(divide="ignore"):
        log_w = -mt * np.log(x) - (xi / x if xi > 0.0 else 0.0)
    live = x >= t
    log_w = np.where(live, log_w, -np.inf)
    if not np.any(live):
        raise DiagnosticError("Ни одна выборка X не пережила момент t")
    weights = np.exp(log_w - np.max(log_w[live]))
    numerator = np.where(x >= T, weights, 0.0)
    a_mean, b_mean = numerator.mean(), weights.mean()
    ratio = a_mean / b_mean
    se = float(np.sqrt(np.var(numerator - ratio * weights, ddof=1) / n_samples) / b_mean)
    ess = float(weights.sum() ** 2 / np.sum(weights ** 2))
    degenerate = ess < config.min_effective_sample_size
    if degenerate:
        logger.warning("⚠️ Вырождение весов: эффективный размер выборки %.1f", ess)
    return OracleEstimate(
        t=float(t), xi=float(xi), maturity=float(T), estimate=float(ratio),
        standard_error=se, effective_sample_size=ess, degenerate=degenerate,
    )


__all__ = [
    "MonteCarloEngine",
    "monte_carlo",
    "InnovationsAccumulator",
    "MartingaleAccumulator",
    "ForwardVolatilityAccumulator",
    "default_check_times",
    "simulate_q",
    "innovations_diagnostics",
    "martingale_diagnostics",
    "forward_volatility_diagnostics",
    "price_option_mc",
    "simulate_gamma",
    "gamma_weight_oracle",
    "gamma_oracle_grid",
]
