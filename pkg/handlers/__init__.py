"""Обработчики подкоманд CLI"""
from .commands import (
    COMMANDS,
    curve_command,
    diagnose_command,
    exit_code_for,
    price_command,
    simulate_command,
)

__all__ = [
    "COMMANDS",
    "curve_command",
    "simulate_command",
    "price_command",
    "diagnose_command",
    "exit_code_for",
]
