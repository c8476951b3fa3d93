#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Загрузка файлов сценариев (YAML; JSON читается тем же загрузчиком)
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import ValidationError

from core.exceptions import ScenarioError
from models.scenario import Scenario

logger = logging.getLogger(__name__)


class ScenarioLoader:
    """Чтение и проверка сценария"""

    def __init__(self, scenario_file: Union[str, Path]):
        self.scenario_file = Path(scenario_file)
        self.raw: Dict[str, Any] = {}

    def load_raw(self) -> Dict[str, Any]:
        try:
            with open(self.scenario_file, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except FileNotFoundError as e:
            raise ScenarioError(f"Файл сценария не найден: {self.scenario_file}") from e
        except yaml.YAMLError as e:
            raise ScenarioError(f"Ошибка разбора {self.scenario_file}: {e}") from e
        if not isinstance(data, dict):
            raise ScenarioError(f"Сценарий {self.scenario_file} должен быть словарём верхнего уровня")
        self.raw = data
        return data

    def load(
        self,
        seed: Optional[int] = None,
        out: Optional[str] = None,
        precision: Optional[int] = None,
    ) -> Scenario:
        """Сценарий с переопределениями из командной строки"""
        data = dict(self.load_raw())
        if seed is not None:
            data["seed"] = seed
        if out is not None or precision is not None:
            output = dict(data.get("output") or {})
            if out is not None:
                output["directory"] = out
            if precision is not None:
                output["precision"] = precision
            data["output"] = output
        try:
            scenario = Scenario.model_validate(data)
        except ValidationError as e:
            raise ScenarioError(f"Некорректный сценарий {self.scenario_file}:\n{e}") from e
        logger.info("📄 Загружен сценарий %s (seed=%d)", scenario.name or self.scenario_file.name, scenario.seed)
        return scenario


def load_scenario(path: Union[str, Path], **overrides) -> Scenario:
    return ScenarioLoader(path).load(**overrides)


__all__ = ["ScenarioLoader", "load_scenario"]
