#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Движок информационной модели процентных ставок: командная строка.

    python app.py curve    --scenario config/scenarios/liquidity_paths.yaml
    python app.py simulate --scenario config/scenarios/liquidity_paths.yaml --seed 42
    python app.py price    --scenario config/scenarios/bond_option_strikes.yaml --out output/run1
    python app.py diagnose --scenario config/scenarios/liquidity_paths.yaml --precision 10
"""

import argparse
import logging
import signal
import sys
from pathlib import Path
from typing import List, Optional, TextIO

# -------------------------------------------------
# Path fix
# -------------------------------------------------
sys.path.insert(0, str(Path(__file__).parent))

from config.settings import config  # noqa: E402
from core.exceptions import ModelError, ScenarioError  # noqa: E402
from core.scenario_loader import load_scenario  # noqa: E402
from handlers.commands import COMMANDS, exit_code_for  # noqa: E402
from models.enums import ExitCode  # noqa: E402
from utils.logger import setup_logging  # noqa: E402

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ibr",
        description="Модель процентных ставок с информацией о моменте кризиса ликвидности",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="подкоманда")
    parser.add_argument("--scenario", required=True, help="файл сценария (YAML или JSON)")
    parser.add_argument("--seed", type=int, default=None, help="переопределить seed сценария")
    parser.add_argument("--out", default=None, help="выходной каталог")
    parser.add_argument("--precision", type=int, default=None, help="значащих цифр в CSV")
    return parser


def main(argv: Optional[List[str]] = None, stream: Optional[TextIO] = None) -> int:
    args = build_parser().parse_args(argv)
    stream = sys.stdout if stream is None else stream
    engine_logger = setup_logging(
        log_level=getattr(logging, config.log_level, logging.INFO),
        run_name=f"ibr_{args.command}",
        log_dir=config.log_dir,
        log_to_file=config.log_to_file,
    )
    engine_logger.log_startup_info(config.summary())

    try:
        scenario = load_scenario(args.scenario, seed=args.seed, out=args.out, precision=args.precision)
        code = COMMANDS[args.command](scenario, stream)
    except ScenarioError as e:
        logger.error(f"❌ {e}")
        code = ExitCode.SCENARIO_ERROR
    except ModelError as e:
        code = exit_code_for(e)
        logger.error(f"❌ {type(e).__name__}: {e}", exc_info=True)
    finally:
        engine_logger.log_run_footprint(args.command)
    return int(code)


# -------------------------------------------------
# SIGNALS
# -------------------------------------------------
def signal_handler(signum, frame):
    logger.info(f"📶 Получен сигнал {signum}")
    sys.exit(130)


# -------------------------------------------------
# RUN
# -------------------------------------------------
if __name__ == "__main__":
    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)
    sys.exit(main())
