#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Менеджер результатов: каталог прогона, CSV и текстовые отчёты
"""
import logging
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from config.settings import config
from utils.formatters import write_csv

logger = logging.getLogger(__name__)


class DataManager:
    """Запись результатов одного прогона в выходной каталог"""

    def __init__(self, directory: Optional[Union[str, Path]] = None, precision: Optional[int] = None):
        self.directory = Path(directory or config.output_dir)
        self.precision = int(precision or config.csv_precision)
        logger.info(f"💾 DataManager: каталог {self.directory}, точность {self.precision}")

    def path(self, name: str) -> Path:
        return self.directory / name

    def save_frame(self, name: str, frame: pd.DataFrame) -> Path:
        return write_csv(frame, self.path(name), self.precision)

    def save_frames(self, folder: str, frames: List[pd.DataFrame], prefix: str = "path") -> List[Path]:
        """Набор однотипных таблиц: folder/prefix_00000.csv, ..."""
        return [self.save_frame(f"{folder}/{prefix}_{i:05d}.csv", frame) for i, frame in enumerate(frames)]

    def save_text(self, name: str, text: str) -> Path:
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        return path

