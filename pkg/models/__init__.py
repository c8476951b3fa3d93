"""
Модели данных движка
"""
from .enums import CurveKind, ExitCode, InstrumentType, Measure, PhiKind, PricingMethod, ProcessKind
from .information import MarketState, ModelSpec, PhiFunction, RateSchedule
from .instruments import BondOptionSpec, OptionQuote, SwaptionSpec
from .simulation import DiagnosticReport, GammaSimulation, OracleEstimate, PathBundle, PathSample, SimulationPlan

__all__ = [
    "CurveKind",
    "ExitCode",
    "InstrumentType",
    "Measure",
    "PhiKind",
    "PricingMethod",
    "ProcessKind",
    "MarketState",
    "ModelSpec",
    "PhiFunction",
    "RateSchedule",
    "BondOptionSpec",
    "OptionQuote",
    "SwaptionSpec",
    "DiagnosticReport",
    "GammaSimulation",
    "OracleEstimate",
    "PathBundle",
    "PathSample",
    "SimulationPlan",
]
