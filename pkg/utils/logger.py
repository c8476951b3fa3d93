#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Настройка логирования
"""

import logging
import os
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import psutil


class EngineLogger:
    """Класс для настройки логирования движка"""

    def __init__(self, log_dir: str = "logs", log_level: int = logging.INFO, log_to_file: bool = False):
        self.log_dir = Path(log_dir)
        self.log_level = log_level
        self.log_to_file = log_to_file
        self.log_file: Optional[Path] = None
        self._started = time.perf_counter()
        self._setup_done = False

    def setup(self, run_name: str = "ibr"):
        """Настройка логирования"""
        if self._setup_done:
            return

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        # stdout занят таблицами
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        console_handler.setLevel(self.log_level)

        root_logger = logging.getLogger()
        root_logger.setLevel(self.log_level)
        root_logger.handlers.clear()
        root_logger.addHandler(console_handler)

        if self.log_to_file:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d")
            self.log_file = self.log_dir / f"{run_name}_{timestamp}.log"
            file_handler = logging.FileHandler(self.log_file, encoding='utf-8')
            file_handler.setFormatter(formatter)
            file_handler.setLevel(self.log_level)
            root_logger.addHandler(file_handler)

        logging.getLogger('asyncio').setLevel(logging.WARNING)
        logging.getLogger('concurrent.futures').setLevel(logging.WARNING)

        self._started = time.perf_counter()
        self._setup_done = True

        logging.info("=" * 60)
        logging.info(f"🚀 Запуск: {run_name}")
        if self.log_file is not None:
            logging.info(f"📁 Логи сохраняются в: {self.log_file}")
        logging.info(f"📊 Уровень логирования: {logging.getLevelName(self.log_level)}")
        logging.info("=" * 60)

    def get_logger(self, name: str) -> logging.Logger:
        return logging.getLogger(name)

    def log_startup_info(self, config_info: Dict[str, Any]):
        """Записать информацию о конфигурации при запуске"""
        logger = self.get_logger(__name__)
        logger.info("📋 КОНФИГУРАЦИЯ ДВИЖКА:")
        for key, value in config_info.items():
            logger.info(f"  {key}: {value}")
        logger.info("=" * 60)

    def log_run_footprint(self, command: str) -> Dict[str, float]:
        """Время, память и загрузка процессора на конец прогона"""
        process = psutil.Process(os.getpid())
        with process.oneshot():
            memory_mb = process.memory_info().rss / 1024 / 1024
            cpu_seconds = sum(process.cpu_times()[:2])
        footprint = {
            "elapsed_s": time.perf_counter() - self._started,
            "cpu_s": cpu_seconds,
            "memory_mb": memory_mb,
        }
        self.get_logger(__name__).info(
            f"⏱️ {command}: {footprint['elapsed_s']:.2f}с, CPU {footprint['cpu_s']:.2f}с, "
            f"память {footprint['memory_mb']:.1f} МБ"
        )
        return footprint


engine_logger = EngineLogger()


def setup_logging(
    log_level: int = logging.INFO,
    run_name: str = "ibr",
    log_dir: Optional[str] = None,
    log_to_file: bool = False,
) -> EngineLogger:
    """Функция для быстрой настройки логирования"""
    engine_logger.log_level = log_level
    engine_logger.log_to_file = log_to_file
    if log_dir is not None:
        engine_logger.log_dir = Path(log_dir)
    engine_logger.setup(run_name)
    return engine_logger
