"""Ядро: кривая, квадратуры, информационный процесс, оценка"""
from .exceptions import ModelError

__all__ = ["ModelError"]
