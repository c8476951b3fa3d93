#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Начальная кривая дисконтирования P_{0T}.

Кривая играет роль функции выживания Q(X >= T) момента кризиса
ликвидности X; плотность rho_0(x) = -dP_{0x}/dx задаёт априорный закон X.
Все методы векторизованы: скаляр на входе -> float на выходе.
"""
import logging
from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import config
from core.exceptions import DomainError, HorizonError
from models.enums import CurveKind

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _restore(values: np.ndarray, like: ArrayLike):
    if np.ndim(like) == 0:
        return float(values)
    return values


class DiscountCurve(ABC):
    """Базовый класс начальной кривой; неизменяем после построения"""

    kind: CurveKind

    def __init__(self, horizon: Optional[float] = None):
        self.horizon = float(config.curve_horizon if horizon is None else horizon)
        if self.horizon <= 0:
            raise DomainError(f"Горизонт кривой должен быть положительным: {self.horizon}")

    # -------------------------------------------------
    # Реализация в наследниках
    # -------------------------------------------------
    @abstractmethod
    def _discount(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _density(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _inverse(self, p: np.ndarray) -> np.ndarray:
        ...

    # -------------------------------------------------
    # Public API
    # -------------------------------------------------
    @property
    def far_horizon(self) -> float:
        return 10.0 * self.horizon

    @property
    def kinks(self) -> np.ndarray:
        """Сроки, в которых rho_0 или её производная разрывны"""
        return np.empty(0)

    def discount(self, T: ArrayLike):
        """P_{0T}; значения в (0, 1], P_{00} = 1"""
        arr = self._maturities(T, "maturity")
        return _restore(self._discount(arr), T)

    def density(self, x: ArrayLike):
        """rho_0(x) = -dP_{0x}/dx"""
        arr = self._maturities(x, "density argument")
        return _restore(np.maximum(self._density(arr), 0.0), x)

    def inverse_discount(self, p: ArrayLike):
        """X(p): discount(X(p)) = p; убывает по p"""
        arr = np.asarray(p, dtype=float)
        if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr > 1.0):
            raise DomainError("Дисконт-фактор должен лежать в (0, 1]")
        return _restore(self._inverse(arr), p)

    def initial_forward_rate(self, T: ArrayLike):
        """f_{0T} = rho_0(T) / P_{0T}"""
        arr = self._maturities(T, "maturity")
        P = self._discount(arr)
        if np.any(P < config.discount_floor):
            raise HorizonError(f"P_0T ниже порога {config.discount_floor:g}: форвардная ставка не определена")
        return _restore(np.maximum(self._density(arr), 0.0) / P, T)

    def validate(self) -> "DiscountCurve":
        """Проверка инвариантов кривой на сетке; возвращает self"""
        grid = np.concatenate([np.linspace(0.0, self.horizon, 2001), np.linspace(self.horizon, self.far_horizon, 201)[1:]])
        values = self._discount(grid)
        if abs(values[0] - 1.0) > 1e-12:
            raise DomainError(f"P_00 должно быть 1, получено {values[0]!r}")
        representable = values[1:] > 0.0
        if np.any(np.diff(values)[representable] >= 0.0):
            raise DomainError("Кривая дисконтирования должна строго убывать по сроку")
        if np.any(self._density(grid) < 0.0):
            raise DomainError("Плотность rho_0 отрицательна")
        if values[-1] >= config.vanishing_tolerance:
            raise DomainError(
                f"P_0T не стремится к нулю: P(0, {self.far_horizon:g}) = {values[-1]:.3g}"
            )
        return self

    def describe(self) -> str:
        return f"{self.kind.value}(horizon={self.horizon:g})"

    @staticmethod
    def _maturities(values: ArrayLike, what: str) -> np.ndarray:
        arr = np.asarray(values, dtype=float)
        if np.any(np.isnan(arr)) or np.any(arr < 0.0):
            raise DomainError(f"Отрицательный аргумент ({what}) не допускается")
        return arr


class FlatCurve(DiscountCurve):
    """Плоская кривая P_{0T} = exp(-r T)"""

    kind = CurveKind.FLAT

    def __init__(self, rate: float, horizon: Optional[float] = None):
        super().__init__(horizon)
        if not rate > 0.0:
            raise DomainError(f"Ставка плоской кривой должна быть положительной: {rate}")
        self.rate = float(rate)
        self.validate()

    def _discount(self, x):
        return np.exp(-self.rate * x)

    def _density(self, x):
        return self.rate * np.exp(-self.rate * x)

    def _inverse(self, p):
        return -np.log(p) / self.rate

    def describe(self) -> str:
        return f"flat(rate={self.rate:g})"


class TableCurve(DiscountCurve):
    """
    Табличная кривая: лог-линейная интерполяция дисконт-факторов
    (кусочно-постоянные форварды), экстраполяция последним форвардом.
    """

    kind = CurveKind.TABLE

    def __init__(self, knots: Sequence[Tuple[float, float]], horizon: Optional[float] = None):
        super().__init__(horizon)
        rows = sorted((float(T), float(P)) for T, P in knots)
        if not rows:
            raise DomainError("Табличная кривая требует хотя бы один узел")
        if rows[0][0] > 0.0:
            rows.insert(0, (0.0, 1.0))
        if len(rows) < 2:
            raise DomainError("Табличная кривая требует узел с положительным сроком")
        maturities = np.array([T for T, _ in rows])
        discounts = np.array([P for _, P in rows])

        if maturities[0] < 0.0 or abs(discounts[0] - 1.0) > 1e-15:
            raise DomainError("Узел T=0 должен иметь дисконт-фактор 1")
        if np.any(np.diff(maturities) <= 0.0):
            raise DomainError("Сроки узлов должны строго возрастать")
        if np.any(discounts <= 0.0) or np.any(discounts > 1.0):
            raise DomainError("Дисконт-факторы узлов должны лежать в (0, 1]")
        if np.any(np.diff(discounts) >= 0.0):
            raise DomainError("Дисконт-факторы узлов должны строго убывать (исправление не выполняется)")

        self.maturities = maturities
        self.discounts = discounts
        self.log_discounts = -np.log(discounts)
        self.rates = np.diff(self.log_discounts) / np.diff(maturities)
        logger.debug("📈 Табличная кривая: %d узлов, последний форвард %.6g", len(rows), self.rates[-1])
        self.validate()

    def _segment(self, x):
        idx = np.searchsorted(self.maturities, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.maturities) - 1)
        rate_idx = np.minimum(idx, len(self.rates) - 1)
        return idx, self.rates[rate_idx]

    def _discount(self, x):
        idx, rate = self._segment(x)
        return np.exp(-(self.log_discounts[idx] + rate * (x - self.maturities[idx])))

    def _density(self, x):
        _, rate = self._segment(x)
        return rate * self._discount(x)

    def _inverse(self, p):
        level = -np.log(p)
        idx = np.searchsorted(self.log_discounts, level, side="right") - 1
        idx = np.clip(idx, 0, len(self.maturities) - 1)
        rate = self.rates[np.minimum(idx, len(self.rates) - 1)]
        return self.maturities[idx] + (level - self.log_discounts[idx]) / rate

    @property
    def kinks(self) -> np.ndarray:
        # форвард скачет во внутренних узлах
        return self.maturities[1:-1]

    def describe(self) -> str:
        return f"table(knots={len(self.maturities)})"


class ParametricCurve(DiscountCurve):
    """
    Кривая, заданная функцией P(x) (и, по возможности, аналитической
    плотностью). За горизонтом H хвост продолжается форвардом f_{0H}.
    """

    kind = CurveKind.PARAMETRIC
    _bisection_steps = 64

    def __init__(
        self,
        discount_fn: Callable[[np.ndarray], np.ndarray],
        density_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        inverse_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        horizon: Optional[float] = None,
        name: str = "parametric",
    ):
        super().__init__(horizon)
        self._fn = discount_fn
        self._density_fn = density_fn
        self._inverse_fn = inverse_fn
        self.name = name
        H = np.array([self.horizon])
        self._tail_discount = float(self._fn(H)[0])
        self._tail_rate = float(self._inner_density(H)[0]) / self._tail_discount
        self.validate()

    def _inner_density(self, x):
        if self._density_fn is not None:
            return self._density_fn(x)
        h = np.maximum(1e-5, 1e-5 * x)
        left = np.maximum(x - h, 0.0)
        right = x + h
        return -(self._fn(right) - self._fn(left)) / (right - left)

    def _discount(self, x):
        inside = x <= self.horizon
        tail = self._tail_discount * np.exp(-self._tail_rate * (np.where(inside, self.horizon, x) - self.horizon))
        return np.where(inside, self._fn(np.minimum(x, self.horizon)), tail)

    def _density(self, x):
        inside = x <= self.horizon
        tail = self._tail_rate * self._discount(np.where(inside, self.horizon, x))
        return np.where(inside, self._inner_density(np.minimum(x, self.horizon)), tail)

    def _inverse(self, p):
        inside = p >= self._tail_discount
        out = np.empty_like(p)
        if np.any(~inside):
            if self._tail_rate <= 0.0:
                raise HorizonError("Дисконт-фактор ниже значения на горизонте кривой")
            out[~inside] = self.horizon + np.log(self._tail_discount / p[~inside]) / self._tail_rate
        if np.any(inside):
            target = p[inside]
            if self._inverse_fn is not None:
                out[inside] = self._inverse_fn(target)
            else:
                out[inside] = self._bisect(target)
        return out

    def _bisect(self, target: np.ndarray) -> np.ndarray:
        lo = np.zeros_like(target)
        hi = np.full_like(target, self.horizon)
        for _ in range(self._bisection_steps):
            mid = 0.5 * (lo + hi)
            above = self._fn(mid) > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        x = 0.5 * (lo + hi)
        # полировка Ньютоном внутри найденной скобки
        for _ in range(2):
            rho = self._inner_density(x)
            step = np.where(rho > 0.0, (self._fn(x) - target) / np.where(rho > 0.0, rho, 1.0), 0.0)
            x = np.clip(x + step, lo, hi)
        return x

    @property
    def kinks(self) -> np.ndarray:
        return np.array([self.horizon])

    def describe(self) -> str:
        return f"{self.name}(horizon={self.horizon:g})"


def nelson_siegel_curve(beta0: float, beta1: float, beta2: float, tau: float, horizon: Optional[float] = None) -> ParametricCurve:
    """Кривая Нельсона-Сигеля с аналитической плотностью"""
    if tau <= 0.0:
        raise DomainError("Параметр tau кривой Нельсона-Сигеля должен быть положительным")
    if beta0 <= 0.0:
        raise DomainError("beta0 должен быть положительным, иначе P_0T не стремится к нулю")

    def integrated_yield(x):
        decay = np.exp(-x / tau)
        return beta0 * x + (beta1 + beta2) * tau * (1.0 - decay) - beta2 * x * decay

    def forward(x):
        decay = np.exp(-x / tau)
        return beta0 + beta1 * decay + beta2 * (x / tau) * decay

    def discount_fn(x):
        return np.exp(-integrated_yield(x))

    def density_fn(x):
        return forward(x) * discount_fn(x)

    return ParametricCurve(discount_fn, density_fn, horizon=horizon, name="nelson_siegel")


# -------------------------------------------------
# Функциональный интерфейс
# -------------------------------------------------
def discount(curve: DiscountCurve, T: ArrayLike):
    return curve.discount(T)


def density(curve: DiscountCurve, x: ArrayLike):
    return curve.density(x)


def inverse_discount(curve: DiscountCurve, p: ArrayLike):
    return curve.inverse_discount(p)


def initial_forward_rate(curve: DiscountCurve, T: ArrayLike):
    return curve.initial_forward_rate(T)
