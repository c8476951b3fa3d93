#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Наблюдаемые модели: цены облигаций, ставки, семейство Phi-hat,
волатильности, аннуитеты, ядро ценообразования и премия за риск.

Ненормированная условная плотность момента кризиса:
    броуновские модели  p_t(x) = rho_0(x) exp(phi(x) eta_t - phi(x)^2 tau_t / 2)
    гамма-модель        p_t(x) = rho_0(x) x^(-m t) exp(-xi_t / x)
Все хвостовые интегралы считаются в лог-масштабе: показатель сдвигается
на свой аналитический максимум по [lower, inf).
"""
import logging
from typing import Callable, Dict, Hashable, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import config
from core.curve import DiscountCurve
from core.exceptions import DomainError, IntegrabilityError, SurvivalError, UnsupportedModelError
from core.quad import QuadratureSpec, TailRule, integrate_interval, integrate_tail, log_normal_cdf, tail_rule
from models.enums import PhiKind
from models.information import MarketState, ModelSpec, PhiFunction

logger = logging.getLogger(__name__)

Tag = Hashable


# -------------------------------------------------
# Лог-веса и их максимумы
# -------------------------------------------------
def brownian_log_weight(phi_x, eta, tau: float):
    return phi_x * eta - 0.5 * phi_x * phi_x * tau


def gamma_log_weight(x, xi, mt: float):
    with np.errstate(divide="ignore", invalid="ignore"):
        power = -mt * np.log(x) if mt > 0.0 else np.zeros_like(x)
        decay = np.where(np.asarray(xi) > 0.0, -np.asarray(xi) / x, 0.0)
        out = power + decay
    # x -> 0 при xi > 0: exp(-xi/x) гасит степенной множитель
    return np.where(np.isnan(out), -np.inf, out)


def brownian_shift(phi: PhiFunction, lower: float, eta, tau: float) -> np.ndarray:
    """max по x >= lower показателя phi(x) eta - phi(x)^2 tau / 2"""
    eta = np.asarray(eta, dtype=float)
    if tau <= 0.0:
        return np.zeros_like(eta)
    lo, hi = phi.range_on(lower)
    y = np.clip(eta / tau, lo, hi)
    return y * eta - 0.5 * y * y * tau


def gamma_shift(lower: float, xi, mt: float) -> np.ndarray:
    """max по x >= lower показателя -m t ln x - xi / x"""
    xi = np.asarray(xi, dtype=float)
    if mt <= 0.0:
        return np.zeros_like(xi)
    x_star = np.maximum(xi / mt, lower)
    safe = np.where(x_star > 0.0, x_star, 1.0)
    return np.where(x_star > 0.0, -mt * np.log(safe) - xi / safe, 0.0)


def _log(value: float) -> float:
    return float(np.log(value)) if value > 0.0 else -np.inf


# -------------------------------------------------
# Условная плотность одного состояния
# -------------------------------------------------
class ConditionalDensityView:
    """
    Кривая + модель + состояние. Хвостовые интегралы кэшируются
    внутри объекта по (нижний предел, подынтегральная функция).
    """

    def __init__(
        self,
        curve: DiscountCurve,
        model: ModelSpec,
        state: MarketState,
        spec: Optional[QuadratureSpec] = None,
    ):
        if not state.alive:
            raise SurvivalError(f"Кризис уже наступил к моменту t={state.t:g}: цены не определены")
        self.curve = curve
        self.model = model
        self.state = state
        self.spec = spec or config.quadrature_spec()
        self._moments: Dict[Tuple[float, Tag], Tuple[float, float]] = {}

    @property
    def t(self) -> float:
        return self.state.t

    @property
    def mt(self) -> float:
        return self.model.m * self.state.t

    def log_weight(self, x: np.ndarray) -> np.ndarray:
        if self.model.is_brownian:
            return brownian_log_weight(self.model.phi.raw(x), self.state.eta, self.state.tau)
        return gamma_log_weight(x, self.state.xi, self.mt)

    def shift(self, lower: float) -> float:
        if self.model.is_brownian:
            return float(brownian_shift(self.model.phi, lower, self.state.eta, self.state.tau))
        return float(gamma_shift(lower, self.state.xi, self.mt))

    def log_density(self, x: float) -> float:
        rho = self.curve.density(x)
        return _log(rho) + float(self.log_weight(np.array([x]))[0])

    def density(self, x: float) -> float:
        """p_t(x) без нормировки"""
        return float(np.exp(self.log_density(x)))

    def _integrand(self, tag: Tag, lower: float) -> Callable[[np.ndarray], np.ndarray]:
        if tag == "mass":
            return np.ones_like
        if tag == "phi":
            return self.model.phi.raw
        if tag == "excess":
            return lambda x: x - lower
        if isinstance(tag, tuple) and tag[0] == "weighted":
            kappa = tag[1]
            return lambda x: (np.exp(-kappa * lower) - np.exp(-kappa * x)) / kappa
        raise KeyError(tag)

    def moments(self, lower: float, tags: Sequence[Tag]) -> Tuple[float, np.ndarray]:
        """
        Сдвиг S и интегралы int_lower^inf rho_0 g exp(lw - S) для каждой
        функции g из tags; недостающие считаются одной векторной квадратурой.
        """
        lower = float(lower)
        missing = [tag for tag in tags if (lower, tag) not in self._moments]
        if missing:
            shift = self.shift(lower)
            functions = [self._integrand(tag, lower) for tag in missing]

            def stacked(x):
                weight = np.exp(self.log_weight(x) - shift)
                return np.stack([fn(x) * weight for fn in functions])

            values = np.atleast_1d(integrate_tail(stacked, self.curve, lower, self.spec))
            for tag, value in zip(missing, values):
                self._moments[(lower, tag)] = (shift, float(value))
        shift = self._moments[(lower, tags[0])][0]
        return shift, np.array([self._moments[(lower, tag)][1] for tag in tags])

    def log_tail_mass(self, lower: float) -> float:
        """ln int_lower^inf p_t(x) dx"""
        shift, (mass,) = self.moments(lower, ("mass",))
        return shift + _log(mass)


def _check_maturity(view: ConditionalDensityView, T: float, what: str = "T") -> float:
    T = float(T)
    if not T >= view.t:
        raise DomainError(f"{what}={T:g} раньше текущего момента t={view.t:g}")
    return T


def _require_brownian(view: ConditionalDensityView, what: str):
    if not view.model.is_brownian:
        raise UnsupportedModelError(f"{what} определена только для броуновской информации")


# -------------------------------------------------
# Облигации и ставки
# -------------------------------------------------
def bond_price(view: ConditionalDensityView, T: float) -> float:
    """P_tT = int_T p_t / int_t p_t"""
    T = _check_maturity(view, T)
    if T == view.t:
        return 1.0
    return float(min(1.0, np.exp(view.log_tail_mass(T) - view.log_tail_mass(view.t))))


def bond_prices(view: ConditionalDensityView, maturities: Sequence[float]) -> np.ndarray:
    return np.array([bond_price(view, T) for T in maturities])


def closed_form_bond_flat_linear(r: float, sigma: float, t: float, xi: float, T: float) -> float:
    """Цена облигации для плоской кривой и phi(x) = x: отношение нормальных функций распределения"""
    if not (r > 0.0 and sigma > 0.0 and t > 0.0):
        raise DomainError("Нужны r > 0, sigma > 0, t > 0")
    if T < t:
        raise DomainError(f"T={T:g} раньше t={t:g}")
    root_t = np.sqrt(t)
    anchor = (xi - r / sigma) / root_t
    log_num = log_normal_cdf(anchor - sigma * T * root_t)
    log_den = log_normal_cdf(anchor - sigma * t * root_t)
    if not np.isfinite(log_den):
        raise DomainError("Знаменатель обратился в ноль даже в лог-масштабе")
    return float(np.exp(log_num - log_den))


def _rate(view: ConditionalDensityView, T: float) -> float:
    log_rho = view.log_density(T)
    if not np.isfinite(log_rho):
        return 0.0
    return float(np.exp(log_rho - view.log_tail_mass(T)))


def short_rate(view: ConditionalDensityView) -> float:
    """r_t = p_t(t) / int_t p_t"""
    return _rate(view, view.t)


def forward_rate(view: ConditionalDensityView, T: float) -> float:
    """f_tT = p_t(T) / int_T p_t"""
    return _rate(view, _check_maturity(view, T))


def survival_probability(view: ConditionalDensityView) -> float:
    """Q(X >= t | xi_t) = int_t p_t / int_0 p_t"""
    t = view.t
    if t == 0.0:
        return 1.0
    model, state = view.model, view.state
    if not model.is_brownian and view.mt > 0.0 and state.xi == 0.0:
        if view.mt >= 1.0:
            raise IntegrabilityError(
                f"x^(-m t) не интегрируема в нуле при m t = {view.mt:g} >= 1 и xi = 0"
            )
        # x = t s^k, k = 1/(1 - m t): особенность x^(-m t) уходит в якобиан
        k = 1.0 / (1.0 - view.mt)
        head = t * k * integrate_interval(lambda s: view.curve.density(t * s ** k), 0.0, 1.0, view.spec)
        log_head = view.shift(t) + _log(head)
        log_total = float(np.logaddexp(log_head, view.log_tail_mass(t)))
    else:
        log_total = view.log_tail_mass(0.0)
    return float(min(1.0, np.exp(view.log_tail_mass(t) - log_total)))


# -------------------------------------------------
# Семейство Phi-hat и волатильности
# -------------------------------------------------
def phi_hat(view: ConditionalDensityView, u: float) -> float:
    """Phi-hat_tu = int_u phi p_t / int_u p_t"""
    _require_brownian(view, "Phi-hat")
    u = _check_maturity(view, u, "u")
    _, (mass, weighted) = view.moments(u, ("mass", "phi"))
    return float(weighted / mass)


def bond_volatility(view: ConditionalDensityView, T: float) -> float:
    """Sigma_tT = Phi-hat_tT - Phi-hat_tt"""
    T = _check_maturity(view, T)
    if T == view.t:
        return 0.0
    return phi_hat(view, T) - phi_hat(view, view.t)


def annuity_price(view: ConditionalDensityView, start: float) -> float:
    """int_start^inf P_tx dx = int_start (y - start) p_t(y) dy / pi_t"""
    start = _check_maturity(view, start, "from")
    shift, (excess,) = view.moments(start, ("excess",))
    return float(np.exp(shift + _log(excess) - view.log_tail_mass(view.t)))


def weighted_annuity_price(view: ConditionalDensityView, start: float, kappa: float) -> float:
    """int_start^inf exp(-kappa x) P_tx dx"""
    if not kappa > 0.0:
        raise DomainError(f"kappa должна быть положительной: {kappa}")
    start = _check_maturity(view, start, "from")
    shift, (weighted,) = view.moments(start, (("weighted", float(kappa)),))
    return float(np.exp(shift + _log(weighted) - view.log_tail_mass(view.t)))


def bond_volatility_annuity_form(view: ConditionalDensityView, T: float) -> float:
    """
    Sigma_tT через цены аннуитетов:
        phi(x) = x:               (T - t) + A(T) / P_tT - A(t)
        phi(x) = s exp(-k x):     s [(e^{-kT} - e^{-kt}) - k (A_k(T) / P_tT - A_k(t))]
    """
    _require_brownian(view, "Волатильность облигации")
    T = _check_maturity(view, T)
    t = view.t
    phi = view.model.phi
    P = bond_price(view, T)
    if phi.kind is PhiKind.LINEAR:
        return (T - t) + annuity_price(view, T) / P - annuity_price(view, t)
    if phi.kind is PhiKind.EXP_DECAY:
        kappa = phi.kappa
        weighted = weighted_annuity_price(view, T, kappa) / P - weighted_annuity_price(view, t, kappa)
        return phi.sign * ((np.exp(-kappa * T) - np.exp(-kappa * t)) - kappa * weighted)
    raise UnsupportedModelError("Аннуитетная форма Sigma известна только для phi(x)=x и phi(x)=±exp(-kx)")


def log_pricing_kernel(view: ConditionalDensityView) -> float:
    return view.log_tail_mass(view.t)


def pricing_kernel(view: ConditionalDensityView) -> float:
    """pi_t = int_t p_t; pi_0 = 1"""
    return float(np.exp(log_pricing_kernel(view)))


def risk_premium(view: ConditionalDensityView) -> float:
    """lambda_t = -sigma_t Phi-hat_tt"""
    _require_brownian(view, "Премия за риск")
    return -view.model.rate_at(view.t) * phi_hat(view, view.t)


def excess_return(view: ConditionalDensityView, T: float) -> float:
    """Избыточная доходность облигации над короткой ставкой: sigma Sigma_tT lambda_t"""
    _require_brownian(view, "Избыточная доходность")
    return view.model.rate_at(view.t) * bond_volatility(view, T) * risk_premium(view)


def forward_rate_volatility(view: ConditionalDensityView, T: float) -> float:
    """sigma f_tT (phi(T) - Phi-hat_tT) = -sigma d/dT Sigma_tT"""
    _require_brownian(view, "Волатильность форвардной ставки")
    T = _check_maturity(view, T)
    return view.model.rate_at(view.t) * forward_rate(view, T) * (float(view.model.phi(T)) - phi_hat(view, T))


def forward_rate_drift(view: ConditionalDensityView, T: float) -> float:
    """Снос HJM: sigma^2 Sigma_tT d/dT Sigma_tT"""
    _require_brownian(view, "Снос форвардной ставки")
    T = _check_maturity(view, T)
    rate = view.model.rate_at(view.t)
    slope = -forward_rate(view, T) * (float(view.model.phi(T)) - phi_hat(view, T))
    return rate * rate * bond_volatility(view, T) * slope


# -------------------------------------------------
# Набор состояний в общий момент t (Монте-Карло)
# -------------------------------------------------
class ConditionalDensityBatch:
    """
    Плотности p_t для многих путей в один момент t на фиксированных
    правилах tail_rule. tau_t детерминирована и общая для всех путей.
    """

    def __init__(
        self,
        curve: DiscountCurve,
        model: ModelSpec,
        t: float,
        eta: Optional[np.ndarray] = None,
        xi: Optional[np.ndarray] = None,
        spec: Optional[QuadratureSpec] = None,
        rules: Optional[Dict[float, TailRule]] = None,
    ):
        self.curve = curve
        self.model = model
        self.t = float(t)
        self.spec = spec or config.quadrature_spec()
        self._rules = rules if rules is not None else {}
        self._cache: Dict[float, Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]] = {}
        if model.is_brownian:
            self.eta = np.asarray(eta, dtype=float)
            self.tau = model.integrated_variance(self.t)
            self.size = self.eta.shape[0]
        else:
            self.xi = np.asarray(xi, dtype=float)
            self.size = self.xi.shape[0]

    def rule(self, lower: float) -> TailRule:
        lower = float(lower)
        if lower not in self._rules:
            self._rules[lower] = tail_rule(self.curve, lower, self.spec)
        return self._rules[lower]

    def _log_weight(self, x: np.ndarray) -> np.ndarray:
        if self.model.is_brownian:
            phi_x = self.model.phi.raw(x)[None, :]
            return brownian_log_weight(phi_x, self.eta[:, None], self.tau)
        return gamma_log_weight(x[None, :], self.xi[:, None], self.model.m * self.t)

    def _shift(self, lower: float) -> np.ndarray:
        if self.model.is_brownian:
            return brownian_shift(self.model.phi, lower, self.eta, self.tau)
        return gamma_shift(lower, self.xi, self.model.m * self.t)

    def moments(self, lower: float):
        """(сдвиг, масса, масса с весом phi) по путям; phi только для броуновских моделей"""
        key = float(lower)
        if key not in self._cache:
            rule = self.rule(lower)
            shift = self._shift(lower)
            weight = np.exp(self._log_weight(rule.nodes) - shift[:, None])
            mass = weight @ rule.weights
            phi_mass = None
            if self.model.is_brownian:
                phi_mass = (weight * self.model.phi.raw(rule.nodes)[None, :]) @ rule.weights
            self._cache[key] = (shift, mass, phi_mass)
        return self._cache[key]

    def log_tail_mass(self, lower: float) -> np.ndarray:
        shift, mass, _ = self.moments(lower)
        with np.errstate(divide="ignore"):
            return shift + np.log(mass)

    def bond_price(self, T: float) -> np.ndarray:
        if T < self.t:
            raise DomainError(f"T={T:g} раньше t={self.t:g}")
        if T == self.t:
            return np.ones(self.size)
        return np.minimum(1.0, np.exp(self.log_tail_mass(T) - self.log_tail_mass(self.t)))

    def forward_rate(self, T: float) -> np.ndarray:
        rho = self.curve.density(T)
        if rho <= 0.0:
            return np.zeros(self.size)
        log_weight = self._log_weight(np.array([float(T)]))[:, 0]
        return np.exp(np.log(rho) + log_weight - self.log_tail_mass(T))

    def short_rate(self) -> np.ndarray:
        return self.forward_rate(self.t)

    def phi_hat(self, u: float) -> np.ndarray:
        if not self.model.is_brownian:
            raise UnsupportedModelError("Phi-hat определена только для броуновской информации")
        _, mass, phi_mass = self.moments(u)
        return phi_mass / mass

    def bond_volatility(self, T: float) -> np.ndarray:
        if T == self.t:
            return np.zeros(self.size)
        return self.phi_hat(T) - self.phi_hat(self.t)

    def forward_rate_volatility(self, T: float) -> np.ndarray:
        rate = self.model.rate_at(self.t)
        return rate * self.forward_rate(T) * (float(self.model.phi(T)) - self.phi_hat(T))

    def log_pricing_kernel(self) -> np.ndarray:
        return self.log_tail_mass(self.t)


__all__ = [
    "ConditionalDensityView",
    "ConditionalDensityBatch",
    "brownian_log_weight",
    "gamma_log_weight",
    "brownian_shift",
    "gamma_shift",
    "bond_price",
    "bond_prices",
    "closed_form_bond_flat_linear",
    "short_rate",
    "forward_rate",
    "survival_probability",
    "phi_hat",
    "bond_volatility",
    "annuity_price",
    "weighted_annuity_price",
    "bond_volatility_annuity_form",
    "log_pricing_kernel",
    "pricing_kernel",
    "risk_premium",
    "excess_return",
    "forward_rate_volatility",
    "forward_rate_drift",
]
