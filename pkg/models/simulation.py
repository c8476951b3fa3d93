#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Модели данных Монте-Карло: план, пути, отчёты диагностики
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

import numpy as np

from core.exceptions import DomainError
from models.enums import Measure


@dataclass(frozen=True)
class SimulationPlan:
    """План моделирования: число путей, сетка, зерно, мера"""
    n_paths: int
    dt: float
    horizon: float
    seed: int = 0
    measure: Measure = Measure.Q
    antithetic: bool = False
    reference_maturity: Optional[float] = None
    forward_maturity: Optional[float] = None
    coarse: bool = False
    drift_scale: float = 1.0
    block_size: Optional[int] = None
    workers: Optional[int] = None

    def __post_init__(self):
        if not self.dt > 0.0:
            raise DomainError(f"Шаг сетки должен быть положительным: {self.dt}")
        if not self.horizon >= self.dt:
            raise DomainError(f"Горизонт {self.horizon} меньше шага {self.dt}")
        if self.n_paths < 1:
            raise DomainError("Нужен хотя бы один путь")
        if self.reference_maturity is not None and self.reference_maturity <= 0.0:
            raise DomainError("Эталонный срок облигации должен быть положительным")

    @property
    def n_steps(self) -> int:
        return max(1, int(np.ceil(self.horizon / self.dt - 1e-9)))

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    @property
    def bond_maturity(self) -> float:
        """T* для колонки P_{t,T*}; по умолчанию горизонт"""
        return self.horizon if self.reference_maturity is None else float(self.reference_maturity)


@dataclass
class PathSample:
    """Один путь: X, xi и производные наблюдаемые на сетке"""
    x_draw: float
    times: np.ndarray
    xi: np.ndarray
    bond: np.ndarray
    short_rate: np.ndarray
    phi_hat: np.ndarray
    innovation: np.ndarray
    density: np.ndarray
    alive: np.ndarray


@dataclass
class PathBundle:
    """
    Блок путей: массивы (пути x узлы сетки). Наблюдаемые на мёртвых
    узлах равны NaN; alive монотонно гаснет.
    """
    times: np.ndarray
    x_draw: np.ndarray
    xi: np.ndarray
    alive: np.ndarray
    bond: np.ndarray
    short_rate: np.ndarray
    phi_hat: np.ndarray
    innovation: np.ndarray
    log_density: np.ndarray
    int_rate: np.ndarray
    bond_vol: np.ndarray
    forward: np.ndarray
    forward_vol: np.ndarray
    rate: np.ndarray
    log_kernel: np.ndarray
    reference_maturity: float
    forward_maturity: Optional[float] = None
    block: int = 0

    def __len__(self) -> int:
        return self.xi.shape[0]

    def __iter__(self) -> Iterator[PathSample]:
        for i in range(len(self)):
            yield PathSample(
                x_draw=float(self.x_draw[i]),
                times=self.times,
                xi=self.xi[i],
                bond=self.bond[i],
                short_rate=self.short_rate[i],
                phi_hat=self.phi_hat[i],
                innovation=self.innovation[i],
                density=np.exp(self.log_density[i]),
                alive=self.alive[i],
            )

    @property
    def density(self) -> np.ndarray:
        return np.exp(self.log_density)

    def time_index(self, t: float) -> int:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-9 * max(1.0, t):
            raise DomainError(f"Момента t={t:g} нет на сетке")
        return idx


@dataclass
class DiagnosticCheck:
    """Одна проверка: значение, ориентир, допуск"""
    name: str
    value: float
    target: float
    tolerance: float
    passed: bool
    standard_error: Optional[float] = None
    informational: bool = False

    def to_row(self) -> Dict[str, Any]:
        return {
            "check": self.name,
            "value": self.value,
            "target": self.target,
            "tolerance": self.tolerance,
            "standard_error": self.standard_error,
            "passed": self.passed,
        }


@dataclass
class DiagnosticReport:
    """Набор проверок одного вида диагностики"""
    name: str
    checks: List[DiagnosticCheck] = field(default_factory=list)
    n_paths: int = 0
    stats: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if not check.informational)

    def check(self, name: str) -> DiagnosticCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def add(
        self,
        name: str,
        value: float,
        target: float,
        tolerance: float,
        standard_error: Optional[float] = None,
        informational: bool = False,
    ) -> DiagnosticCheck:
        passed = bool(np.isfinite(value) and abs(value - target) <= tolerance)
        item = DiagnosticCheck(name, float(value), float(target), float(tolerance), passed, standard_error, informational)
        self.checks.append(item)
        return item


@dataclass
class OracleEstimate:
    """Оценка цены гамма-модели весами важности против квадратуры"""
    t: float
    xi: float
    maturity: float
    estimate: float
    standard_error: float
    effective_sample_size: float
    quadrature: Optional[float] = None
    degenerate: bool = False

    @property
    def within_3se(self) -> bool:
        if self.quadrature is None:
            return True
        return abs(self.estimate - self.quadrature) <= 3.0 * self.standard_error


@dataclass
class GammaSimulation:
    """Пути гамма-модели и проверки оракулом весов"""
    bundles: List[PathBundle]
    oracle: List[OracleEstimate]


__all__ = [
    "SimulationPlan",
    "PathSample",
    "PathBundle",
    "DiagnosticCheck",
    "DiagnosticReport",
    "OracleEstimate",
    "GammaSimulation",
]
