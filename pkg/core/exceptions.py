#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Иерархия исключений модели.

Библиотечный код только возбуждает исключения; перевод в коды
возврата делает слой команд (handlers/commands.py).
"""
from typing import Optional


class ModelError(Exception):
    """Базовая ошибка модели"""


class DomainError(ModelError, ValueError):
    """Аргумент вне области определения"""


class ScenarioError(DomainError):
    """Некорректный файл сценария"""


class HorizonError(ModelError):
    """Запрос за пределами представимой части кривой"""


class SurvivalError(ModelError):
    """Оценка на мёртвом состоянии (X < t уже выявлено)"""


class UnsupportedModelError(ModelError):
    """Операция не определена для данного процесса информации"""


class NumericalError(ModelError):
    """Общий предок численных сбоев"""


class QuadratureError(NumericalError):
    """Квадратура не сошлась; хранит две последние оценки"""

    def __init__(self, message: str, previous: Optional[float] = None, last: Optional[float] = None):
        super().__init__(message)
        self.previous = previous
        self.last = last

    def __str__(self) -> str:
        base = super().__str__()
        if self.previous is None and self.last is None:
            return base
        return f"{base} (оценки: {self.previous!r} -> {self.last!r})"


class BracketingError(NumericalError):
    """Не удалось найти смену знака"""


class IntegrabilityError(NumericalError):
    """Интеграл расходится при данных параметрах"""


class RangeError(ModelError):
    """Наблюдаемая цена вне достижимого диапазона"""


class ConjectureViolationError(ModelError):
    """Нарушена монотонность цены опциона по sigma"""


class DiagnosticError(ModelError):
    """Недостаточно данных для статистической проверки"""


__all__ = [
    "ModelError",
    "DomainError",
    "ScenarioError",
    "HorizonError",
    "SurvivalError",
    "UnsupportedModelError",
    "NumericalError",
    "QuadratureError",
    "BracketingError",
    "IntegrabilityError",
    "RangeError",
    "ConjectureViolationError",
    "DiagnosticError",
]
