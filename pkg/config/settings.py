#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Конфигурационные настройки движка
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, repr(default)))


@dataclass
class EngineConfig:
    """Конфигурация движка"""
    log_level: str = field(default_factory=lambda: os.getenv("IBR_LOG_LEVEL", "INFO").upper())
    log_dir: str = field(default_factory=lambda: os.getenv("IBR_LOG_DIR", "logs"))
    log_to_file: bool = field(default_factory=lambda: os.getenv("IBR_LOG_TO_FILE", "false").lower() == "true")

    quad_nodes: int = field(default_factory=lambda: _env_int("IBR_QUAD_NODES", 256))
    quad_refinement: int = field(default_factory=lambda: _env_int("IBR_QUAD_REFINEMENT", 8))
    quad_rel_tol: float = field(default_factory=lambda: _env_float("IBR_QUAD_REL_TOL", 1e-9))
    quad_abs_tol: float = field(default_factory=lambda: _env_float("IBR_QUAD_ABS_TOL", 1e-12))
    hermite_nodes: int = field(default_factory=lambda: _env_int("IBR_HERMITE_NODES", 200))
    coarse_nodes: int = 64

    root_abs_tol: float = 1e-13
    root_rel_tol: float = 1e-15
    root_max_doublings: int = 60

    curve_horizon: float = field(default_factory=lambda: _env_float("IBR_CURVE_HORIZON", 200.0))
    discount_floor: float = 1e-300
    vanishing_tolerance: float = 1e-4

    mc_block_size: int = field(default_factory=lambda: _env_int("IBR_MC_BLOCK_SIZE", 512))
    mc_workers: int = field(default_factory=lambda: _env_int("IBR_MC_WORKERS", 1))
    min_surviving_paths: int = 100
    min_effective_sample_size: float = 100.0

    csv_precision: int = field(default_factory=lambda: _env_int("IBR_CSV_PRECISION", 12))
    output_dir: str = field(default_factory=lambda: os.getenv("IBR_OUTPUT_DIR", "output"))

    def __post_init__(self):
        logger.debug("🔄 Загрузка конфигурации движка...")
        if self.quad_nodes < 16:
            raise ValueError(f"IBR_QUAD_NODES должно быть не меньше 16, получено {self.quad_nodes}")

    def quadrature_spec(self, coarse: bool = False):
        from core.quad import QuadratureSpec
        if coarse:
            return QuadratureSpec(
                nodes=self.coarse_nodes,
                refinement=self.quad_refinement,
                rel_tol=self.quad_rel_tol,
                abs_tol=self.quad_abs_tol,
                hermite_nodes=self.hermite_nodes,
                panel_order=8,
                grading_depth=24,
            )
        return QuadratureSpec(
            nodes=self.quad_nodes,
            refinement=self.quad_refinement,
            rel_tol=self.quad_rel_tol,
            abs_tol=self.quad_abs_tol,
            hermite_nodes=self.hermite_nodes,
        )

    def root_spec(self):
        from core.quad import RootSpec
        return RootSpec(
            abs_tol=self.root_abs_tol,
            rel_tol=self.root_rel_tol,
            max_doublings=self.root_max_doublings,
        )

    def summary(self) -> Dict[str, Any]:
        return {
            "log_level": self.log_level,
            "quad_nodes": self.quad_nodes,
            "quad_refinement": self.quad_refinement,
            "quad_rel_tol": self.quad_rel_tol,
            "hermite_nodes": self.hermite_nodes,
            "curve_horizon": self.curve_horizon,
            "mc_block_size": self.mc_block_size,
            "mc_workers": self.mc_workers,
            "csv_precision": self.csv_precision,
        }


config = EngineConfig()
