"""Сервисы оценки, моделирования и записи результатов"""
from .data_manager import DataManager
from .derivatives import DerivativesPricer, derivatives
from .monte_carlo import MonteCarloEngine, monte_carlo

__all__ = ["DataManager", "DerivativesPricer", "derivatives", "MonteCarloEngine", "monte_carlo"]
