#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Инструменты и результаты оценки
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import DomainError
from models.enums import InstrumentType, PricingMethod


@dataclass(frozen=True)
class BondOptionSpec:
    """Европейский опцион на дисконтную облигацию"""
    option_maturity: float
    bond_maturity: float
    strike: float

    def __post_init__(self):
        if not 0.0 < self.option_maturity < self.bond_maturity:
            raise DomainError(
                f"Нужно 0 < t < T, получено t={self.option_maturity}, T={self.bond_maturity}"
            )
        if not self.strike >= 0.0:
            raise DomainError(f"Страйк не может быть отрицательным: {self.strike}")


@dataclass(frozen=True)
class SwaptionSpec:
    """Опцион на своп: экспирация t, даты платежей T_1 < ... < T_n"""
    option_maturity: float
    payment_dates: Tuple[float, ...]
    strike: float

    def __post_init__(self):
        dates = tuple(float(T) for T in self.payment_dates)
        if not dates:
            raise DomainError("Нужна хотя бы одна дата платежа")
        if not self.option_maturity > 0.0:
            raise DomainError("Экспирация свопциона должна быть положительной")
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise DomainError("Даты платежей должны строго возрастать")
        if dates[0] <= self.option_maturity:
            raise DomainError("Все даты платежей должны быть позже экспирации")
        if not np.isfinite(self.strike):
            raise DomainError("Страйк должен быть конечным")
        object.__setattr__(self, "payment_dates", dates)

    @property
    def final_date(self) -> float:
        return self.payment_dates[-1]


@dataclass
class OptionQuote:
    """Цена с меткой метода и, для Монте-Карло, стандартной ошибкой"""
    instrument: InstrumentType
    price: float
    method: PricingMethod
    standard_error: Optional[float] = None
    boundary: bool = False
    critical_value: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def within(self, other: float, n_se: float = 3.0) -> bool:
        """|price - other| в пределах n_se стандартных ошибок"""
        se = self.standard_error or 0.0
        return abs(self.price - other) <= n_se * se

    def to_row(self) -> Dict[str, Any]:
        return {
            "instrument": self.instrument.value,
            "method": self.method.value,
            "price": self.price,
            "standard_error": self.standard_error,
            "boundary": self.boundary,
            **self.details,
        }


__all__ = ["BondOptionSpec", "SwaptionSpec", "OptionQuote"]
