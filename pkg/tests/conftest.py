"""
Общие фикстуры: кривые и модели из примеров сценариев
"""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.curve import FlatCurve, TableCurve  # noqa: E402
from models.information import ModelSpec, PhiFunction, RateSchedule  # noqa: E402


@pytest.fixture
def flat_curve():
    return FlatCurve(0.02)


@pytest.fixture
def table_curve():
    return TableCurve([(1.0, 0.98), (2.0, 0.955), (5.0, 0.88), (10.0, 0.76), (30.0, 0.45)])


@pytest.fixture
def paths_model():
    """phi(x) = exp(-0.025 x), sigma = 0.3"""
    return ModelSpec.brownian(PhiFunction.exp_decay(0.025), 0.3)


@pytest.fixture
def option_model():
    """phi(x) = exp(-0.05 x), sigma = 0.25"""
    return ModelSpec.brownian(PhiFunction.exp_decay(0.05), 0.25)


@pytest.fixture
def linear_model():
    return ModelSpec.brownian(PhiFunction.linear(), 0.3)


@pytest.fixture
def deterministic_model():
    return ModelSpec.brownian(PhiFunction.exp_decay(0.025), 0.0)


@pytest.fixture
def gamma_model():
    return ModelSpec.gamma(0.1, PhiFunction.exp_decay(0.02))


@pytest.fixture
def stepped_model():
    return ModelSpec.time_dependent(PhiFunction.exp_decay(0.05), RateSchedule(((0.0, 0.2), (1.0, 0.35))))
