#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Перечисления движка
"""
from enum import Enum, IntEnum


class CurveKind(Enum):
    """Способы задания начальной кривой"""
    FLAT = "flat"
    TABLE = "table"
    PARAMETRIC = "parametric"
    NELSON_SIEGEL = "nelson_siegel"


class PhiKind(Enum):
    """Варианты информационной функции phi(x)"""
    LINEAR = "linear"
    EXP_DECAY = "exp_decay"
    RECIPROCAL = "reciprocal"


class ProcessKind(Enum):
    """Процессы информации"""
    BROWNIAN = "brownian"
    BROWNIAN_TIME_DEPENDENT = "brownian_time_dependent"
    GAMMA = "gamma"


class Measure(Enum):
    """Мера моделирования"""
    Q = "Q"
    B = "B"


class PricingMethod(Enum):
    """Метод, которым получена цена"""
    ANALYTIC = "analytic"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "mc"
    BOUNDARY = "boundary"


class InstrumentType(Enum):
    """Инструменты команды price"""
    BOND = "bond"
    CALL = "call"
    PUT = "put"
    SWAPTION = "swaption"
    IMPLIED_SIGMA = "implied_sigma"
    HYBRID = "hybrid"


class ExitCode(IntEnum):
    """Коды возврата CLI"""
    OK = 0
    SCENARIO_ERROR = 2
    NUMERIC_FAILURE = 3
    DIAGNOSTIC_FAILURE = 4
