"""Конфигурация движка"""
from .settings import EngineConfig, config

__all__ = ["EngineConfig", "config"]
