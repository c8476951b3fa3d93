"""Утилиты"""
from .logger import EngineLogger, engine_logger, setup_logging

__all__ = ["EngineLogger", "engine_logger", "setup_logging"]
