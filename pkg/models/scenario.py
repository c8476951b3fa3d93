#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Схема файла сценария: блоки curve / model / run / output и seed.

Валидация на pydantic v2; построение объектов движка (кривая, модель,
планы Монте-Карло, инструменты) выполняют методы схемы.
"""
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.curve import DiscountCurve, FlatCurve, TableCurve, nelson_siegel_curve
from core.exceptions import ScenarioError
from models.enums import CurveKind, InstrumentType, Measure, PhiKind, ProcessKind
from models.information import MarketState, ModelSpec, PhiFunction, RateSchedule
from models.instruments import BondOptionSpec, SwaptionSpec
from models.simulation import SimulationPlan


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# -------------------------------------------------
# curve
# -------------------------------------------------
class CurveBlock(_Block):
    """Начальная кривая дисконтирования"""
    kind: CurveKind = CurveKind.FLAT
    rate: Optional[float] = None
    knots: Optional[List[Tuple[float, float]]] = None
    beta0: Optional[float] = None
    beta1: float = 0.0
    beta2: float = 0.0
    tau: float = 1.0
    horizon: Optional[float] = None

    @model_validator(mode="after")
    def _check_kind(self) -> "CurveBlock":
        if self.kind is CurveKind.FLAT and (self.rate is None or self.rate <= 0.0):
            raise ValueError("flat-кривой нужна положительная ставка rate")
        if self.kind is CurveKind.TABLE and not self.knots:
            raise ValueError("table-кривой нужен список узлов knots: [[T, P], ...]")
        if self.kind is CurveKind.NELSON_SIEGEL and self.beta0 is None:
            raise ValueError("Кривой Нельсона-Сигеля нужен beta0")
        if self.kind is CurveKind.PARAMETRIC:
            raise ValueError("Параметрическая кривая задаётся только из кода; в сценарии используйте nelson_siegel")
        return self

    def build(self) -> DiscountCurve:
        if self.kind is CurveKind.FLAT:
            curve = FlatCurve(self.rate, horizon=self.horizon)
        elif self.kind is CurveKind.TABLE:
            curve = TableCurve(self.knots, horizon=self.horizon)
        else:
            curve = nelson_siegel_curve(self.beta0, self.beta1, self.beta2, self.tau, horizon=self.horizon)
        return curve.validate()


# -------------------------------------------------
# model
# -------------------------------------------------
class PhiBlock(_Block):
    kind: PhiKind = PhiKind.LINEAR
    kappa: float = 0.0
    x0: float = -1.0
    sign: Literal[1, -1] = 1

    def build(self) -> PhiFunction:
        return PhiFunction(self.kind, kappa=self.kappa, x0=self.x0, sign=self.sign)


class ProcessBlock(_Block):
    kind: ProcessKind = ProcessKind.BROWNIAN
    schedule: Optional[List[Tuple[float, float]]] = None
    m: Optional[float] = None

    @model_validator(mode="after")
    def _check_kind(self) -> "ProcessBlock":
        if self.kind is ProcessKind.BROWNIAN_TIME_DEPENDENT and not self.schedule:
            raise ValueError("Для brownian_time_dependent нужен schedule: [[t, sigma], ...]")
        if self.kind is ProcessKind.GAMMA and (self.m is None or self.m <= 0.0):
            raise ValueError("Для gamma нужен положительный параметр m")
        return self


class ModelBlock(_Block):
    """Информационная функция, процесс и sigma"""
    phi: PhiBlock = Field(default_factory=PhiBlock)
    process: ProcessBlock = Field(default_factory=ProcessBlock)
    sigma: float = Field(default=0.0, ge=0.0)

    def build(self) -> ModelSpec:
        phi = self.phi.build()
        if self.process.kind is ProcessKind.GAMMA:
            return ModelSpec.gamma(self.process.m, phi)
        if self.process.kind is ProcessKind.BROWNIAN_TIME_DEPENDENT:
            return ModelSpec.time_dependent(phi, RateSchedule(tuple(self.process.schedule)))
        return ModelSpec.brownian(phi, self.sigma)


# -------------------------------------------------
# run
# -------------------------------------------------
class CurveRun(_Block):
    """Сетка сроков для команды curve"""
    start: float = Field(default=0.0, ge=0.0)
    stop: float = 30.0
    step: float = Field(default=1.0, gt=0.0)
    maturities: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_grid(self) -> "CurveRun":
        if self.maturities is None and self.stop < self.start:
            raise ValueError("stop меньше start")
        return self

    def grid(self) -> np.ndarray:
        if self.maturities is not None:
            return np.asarray(self.maturities, dtype=float)
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(count)


class PathRun(_Block):
    """Параметры моделирования путей (simulate и diagnose)"""
    n_paths: int = Field(default=1000, ge=1)
    dt: float = Field(default=0.01, gt=0.0)
    horizon: float = Field(default=5.0, gt=0.0)
    reference_maturity: Optional[float] = Field(default=None, gt=0.0)
    forward_maturity: Optional[float] = Field(default=None, gt=0.0)
    coarse: bool = False
    drift_scale: float = 1.0
    antithetic: bool = False
    block_size: Optional[int] = Field(default=None, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_grid(self) -> "PathRun":
        if self.horizon < self.dt:
            raise ValueError("horizon меньше шага dt")
        return self

    def plan(self, seed: int, measure: Measure = Measure.Q) -> SimulationPlan:
        return SimulationPlan(
            n_paths=self.n_paths,
            dt=self.dt,
            horizon=self.horizon,
            seed=seed,
            measure=measure,
            antithetic=self.antithetic,
            reference_maturity=self.reference_maturity,
            forward_maturity=self.forward_maturity,
            coarse=self.coarse,
            drift_scale=self.drift_scale,
            block_size=self.block_size,
            workers=self.workers,
        )


class OracleGridBlock(_Block):
    """Оракул весов на сетке квантилей xi_t для гамма-модели"""
    times: List[float] = Field(min_length=1)
    quantiles: List[float] = Field(default_factory=lambda: [0.1, 0.25, 0.5, 0.75, 0.9], min_length=1)
    n_paths: int = Field(default=20_000, ge=100)
    samples: int = Field(default=200_000, ge=100)

    @field_validator("quantiles")
    @classmethod
    def _inside_unit(cls, value: List[float]) -> List[float]:
        if any(not 0.0 < q < 1.0 for q in value):
            raise ValueError(f"квантили должны лежать в (0, 1): {value}")
        return value


class SimulateRun(PathRun):
    write_paths: bool = True
    oracle_paths: int = Field(default=5, ge=0)
    oracle_samples: int = Field(default=200_000, ge=100)
    oracle_grid: Optional[OracleGridBlock] = None


class DiagnoseRun(PathRun):
    check_times: Optional[List[float]] = None


class InstrumentBlock(_Block):
    """Один инструмент команды price"""
    type: InstrumentType
    t: float = Field(default=0.0, ge=0.0)
    xi: float = 0.0
    T: Optional[float] = None
    K: float = 0.0
    dates: Optional[List[float]] = None
    observed_price: Optional[float] = None
    mc_paths: Optional[int] = Field(default=None, ge=1)
    antithetic: bool = False
    label: Optional[str] = None

    @model_validator(mode="after")
    def _check_fields(self) -> "InstrumentBlock":
        kind = self.type
        if kind is InstrumentType.HYBRID:
            raise ValueError("Гибридные платежи задаются только из кода")
        if kind is InstrumentType.SWAPTION:
            if not self.dates:
                raise ValueError("Свопциону нужны даты платежей dates")
            self.swaption()
            return self
        if self.T is None:
            raise ValueError(f"Инструменту {kind.value} нужен срок T")
        if kind is InstrumentType.BOND:
            if self.T < self.t:
                raise ValueError("Срок облигации T раньше момента оценки t")
            return self
        self.option()
        if kind is InstrumentType.IMPLIED_SIGMA and self.observed_price is None:
            raise ValueError("Для implied_sigma нужна наблюдаемая цена observed_price")
        return self

    def option(self) -> BondOptionSpec:
        return BondOptionSpec(self.t, self.T, self.K)

    def swaption(self) -> SwaptionSpec:
        return SwaptionSpec(self.t, tuple(self.dates), self.K)

    def state(self, model: ModelSpec) -> MarketState:
        return MarketState.from_xi(model, self.t, self.xi)

    @property
    def name(self) -> str:
        return self.label or self.type.value


class PriceRun(_Block):
    instruments: List[InstrumentBlock] = Field(min_length=1)


class RunBlock(_Block):
    """Параметры подкоманд; у каждой подкоманды свой блок"""
    curve: Optional[CurveRun] = None
    simulate: Optional[SimulateRun] = None
    price: Optional[PriceRun] = None
    diagnose: Optional[DiagnoseRun] = None


class OutputBlock(_Block):
    directory: Optional[str] = None
    precision: Optional[int] = Field(default=None, ge=1, le=17)


# -------------------------------------------------
# Сценарий
# -------------------------------------------------
class Scenario(_Block):
    """Файл сценария целиком"""
    name: Optional[str] = None
    curve: CurveBlock
    model: ModelBlock = Field(default_factory=ModelBlock)
    run: RunBlock = Field(default_factory=RunBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @field_validator("name")
    @classmethod
    def _strip_name(cls, value: Optional[str]) -> Optional[str]:
        return value.strip() if value else value

    def require(self, command: str):
        block = getattr(self.run, command)
        if block is None:
            raise ScenarioError(f"В сценарии нет блока run.{command}")
        return block


__all__ = [
    "CurveBlock",
    "PhiBlock",
    "ProcessBlock",
    "ModelBlock",
    "CurveRun",
    "PathRun",
    "SimulateRun",
    "DiagnoseRun",
    "InstrumentBlock",
    "PriceRun",
    "RunBlock",
    "OutputBlock",
    "Scenario",
]
