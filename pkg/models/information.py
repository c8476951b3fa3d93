#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Модели информационного процесса: функция phi(x), спецификация процесса
и наблюдаемое состояние рынка
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.exceptions import DomainError
from models.enums import PhiKind, ProcessKind

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class PhiFunction:
    """
    Информационная функция phi(x).

    LINEAR: phi(x) = x
    EXP_DECAY: phi(x) = sign * exp(-kappa x)
    RECIPROCAL: phi(x) = sign / (x - x0), полюс x0 < 0 вне области X >= 0
    """
    kind: PhiKind = PhiKind.LINEAR
    kappa: float = 0.0
    x0: float = -1.0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise DomainError(f"Знак phi должен быть +1 или -1, получено {self.sign}")
        if self.kind is PhiKind.EXP_DECAY and not self.kappa > 0.0:
            raise DomainError(f"kappa должна быть положительной: {self.kappa}")
        if self.kind is PhiKind.RECIPROCAL and not self.x0 < 0.0:
            raise DomainError(f"Полюс x0 должен быть отрицательным, получено {self.x0}")

    @classmethod
    def linear(cls) -> "PhiFunction":
        return cls(PhiKind.LINEAR)

    @classmethod
    def exp_decay(cls, kappa: float, sign: int = 1) -> "PhiFunction":
        return cls(PhiKind.EXP_DECAY, kappa=kappa, sign=sign)

    @classmethod
    def reciprocal(cls, x0: float, sign: int = 1) -> "PhiFunction":
        return cls(PhiKind.RECIPROCAL, x0=x0, sign=sign)

    def __call__(self, x: ArrayLike):
        arr = np.asarray(x, dtype=float)
        if np.any(np.isnan(arr)) or np.any(arr < 0.0):
            raise DomainError("phi определена только для x >= 0")
        values = self.raw(arr)
        if np.ndim(x) == 0:
            return float(values)
        return values

    def raw(self, x: np.ndarray) -> np.ndarray:
        """phi без проверки области (горячие циклы)"""
        if self.kind is PhiKind.LINEAR:
            return x
        if self.kind is PhiKind.EXP_DECAY:
            return self.sign * np.exp(-self.kappa * x)
        return self.sign / (x - self.x0)

    @property
    def is_increasing(self) -> bool:
        if self.kind is PhiKind.LINEAR:
            return True
        return self.sign < 0

    def range_on(self, lower: float) -> Tuple[float, float]:
        """Замыкание множества значений phi на [lower, inf)"""
        if self.kind is PhiKind.LINEAR:
            return float(lower), np.inf
        if self.kind is PhiKind.EXP_DECAY:
            edge = float(np.exp(-self.kappa * lower))
        else:
            edge = 1.0 / (lower - self.x0)
        return (0.0, edge) if self.sign > 0 else (-edge, 0.0)

    def describe(self) -> str:
        if self.kind is PhiKind.LINEAR:
            return "phi(x)=x"
        sign = "" if self.sign > 0 else "-"
        if self.kind is PhiKind.EXP_DECAY:
            return f"phi(x)={sign}exp(-{self.kappa:g}x)"
        return f"phi(x)={sign}1/(x{-self.x0:+g})"


@dataclass(frozen=True)
class RateSchedule:
    """Кусочно-постоянная интенсивность sigma_s: [(начало, sigma), ...]"""
    knots: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        rows = tuple(sorted((float(t), float(s)) for t, s in self.knots))
        if not rows or rows[0][0] != 0.0:
            raise DomainError("Расписание sigma_s должно начинаться с t=0")
        if any(s <= 0.0 for _, s in rows):
            raise DomainError("sigma_s должна быть положительной")
        if any(b[0] <= a[0] for a, b in zip(rows, rows[1:])):
            raise DomainError("Моменты расписания sigma_s должны строго возрастать")
        object.__setattr__(self, "knots", rows)

    @classmethod
    def constant(cls, sigma: float) -> "RateSchedule":
        return cls(((0.0, sigma),))

    @property
    def starts(self) -> np.ndarray:
        return np.array([t for t, _ in self.knots])

    @property
    def levels(self) -> np.ndarray:
        return np.array([s for _, s in self.knots])

    def rate_at(self, t: ArrayLike):
        idx = np.searchsorted(self.starts, np.asarray(t, dtype=float), side="right") - 1
        values = self.levels[np.maximum(idx, 0)]
        return float(values) if np.ndim(t) == 0 else values

    def integrated(self, t: float, power: int = 1) -> float:
        """int_0^t sigma_s^power ds"""
        starts, levels = self.starts, self.levels
        ends = np.append(starts[1:], np.inf)
        lengths = np.clip(np.minimum(ends, t) - starts, 0.0, None)
        return float(np.sum(levels ** power * lengths))


@dataclass(frozen=True)
class ModelSpec:
    """Спецификация модели: phi и процесс информации"""
    phi: PhiFunction = field(default_factory=PhiFunction)
    process: ProcessKind = ProcessKind.BROWNIAN
    sigma: float = 0.0
    schedule: Optional[RateSchedule] = None
    m: float = 0.0

    def __post_init__(self):
        if self.process is ProcessKind.BROWNIAN and not self.sigma >= 0.0:
            raise DomainError(f"sigma должна быть неотрицательной: {self.sigma}")
        if self.process is ProcessKind.BROWNIAN_TIME_DEPENDENT and self.schedule is None:
            raise DomainError("Для зависящей от времени sigma нужно расписание")
        if self.process is ProcessKind.GAMMA and not self.m > 0.0:
            raise DomainError(f"Параметр m гамма-процесса должен быть положительным: {self.m}")

    @classmethod
    def brownian(cls, phi: PhiFunction, sigma: float) -> "ModelSpec":
        return cls(phi=phi, process=ProcessKind.BROWNIAN, sigma=sigma)

    @classmethod
    def time_dependent(cls, phi: PhiFunction, schedule: RateSchedule) -> "ModelSpec":
        return cls(phi=phi, process=ProcessKind.BROWNIAN_TIME_DEPENDENT, schedule=schedule)

    @classmethod
    def gamma(cls, m: float, phi: Optional[PhiFunction] = None) -> "ModelSpec":
        return cls(phi=phi or PhiFunction(), process=ProcessKind.GAMMA, m=m)

    @property
    def is_brownian(self) -> bool:
        return self.process is not ProcessKind.GAMMA

    def rate_at(self, t: ArrayLike):
        """sigma_t; для гамма-модели не определена"""
        if self.process is ProcessKind.BROWNIAN:
            return self.sigma if np.ndim(t) == 0 else np.full(np.shape(t), self.sigma)
        if self.process is ProcessKind.BROWNIAN_TIME_DEPENDENT:
            return self.schedule.rate_at(t)
        raise DomainError("У гамма-модели нет интенсивности sigma_t")

    def integrated_variance(self, t: float) -> float:
        """tau_t = int_0^t sigma_s^2 ds"""
        if self.process is ProcessKind.BROWNIAN:
            return self.sigma ** 2 * t
        if self.process is ProcessKind.BROWNIAN_TIME_DEPENDENT:
            return self.schedule.integrated(t, power=2)
        raise DomainError("У гамма-модели нет интегральной дисперсии")

    def with_sigma(self, sigma: float) -> "ModelSpec":
        if self.process is not ProcessKind.BROWNIAN:
            raise DomainError("Замена sigma допустима только для постоянной интенсивности")
        return replace(self, sigma=sigma)

    def describe(self) -> str:
        if self.process is ProcessKind.BROWNIAN:
            return f"brownian(sigma={self.sigma:g}, {self.phi.describe()})"
        if self.process is ProcessKind.BROWNIAN_TIME_DEPENDENT:
            return f"brownian_td(schedule={list(self.schedule.knots)}, {self.phi.describe()})"
        return f"gamma(m={self.m:g})"

    def summary(self) -> Dict[str, Any]:
        return {
            "process": self.process.value,
            "phi": self.phi.kind.value,
            "kappa": self.phi.kappa,
            "x0": self.phi.x0,
            "sign": self.phi.sign,
            "sigma": self.sigma,
            "m": self.m,
        }


@dataclass(frozen=True)
class MarketState:
    """
    Наблюдаемое состояние в момент t.

    Броуновские модели: eta = int sigma_s dxi_s, tau = int sigma_s^2 ds
    (для постоянной sigma это sigma*xi и sigma^2 t). Гамма-модель: xi.
    """
    t: float = 0.0
    xi: float = 0.0
    eta: float = 0.0
    tau: float = 0.0
    alive: bool = True

    def __post_init__(self):
        if not self.t >= 0.0:
            raise DomainError(f"Время состояния должно быть неотрицательным: {self.t}")
        if not self.tau >= 0.0:
            raise DomainError(f"tau должно быть неотрицательным: {self.tau}")

    @classmethod
    def initial(cls) -> "MarketState":
        return cls()

    @classmethod
    def from_xi(cls, model: ModelSpec, t: float, xi: float, alive: bool = True) -> "MarketState":
        """
        Состояние по значению xi_t. Для зависящей от времени sigma
        используется эффективная интенсивность sqrt(tau_t / t): при xi ~ N(0, t)
        получаем eta ~ N(0, tau_t), как у B-меры.
        """
        if model.process is ProcessKind.GAMMA:
            if xi < 0.0:
                raise DomainError("Гамма-информация неотрицательна")
            return cls(t=t, xi=xi, alive=alive)
        tau = model.integrated_variance(t)
        scale = np.sqrt(tau / t) if t > 0.0 else model.rate_at(0.0)
        return cls(t=t, xi=xi, eta=float(scale * xi), tau=tau, alive=alive)

    def kill(self) -> "MarketState":
        return replace(self, alive=False)


__all__ = ["PhiFunction", "RateSchedule", "ModelSpec", "MarketState"]
