#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Утилиты для форматирования таблиц и CSV
"""
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from core.curve import DiscountCurve
from models.instruments import OptionQuote
from models.simulation import DiagnosticReport, PathBundle

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["T", "P", "f", "rho"]
PATH_COLUMNS = ["t", "xi", "P", "r", "alive"]
QUOTE_COLUMNS = ["instrument", "label", "method", "price", "standard_error", "boundary", "critical_value"]
DIAGNOSTIC_COLUMNS = ["report", "check", "value", "target", "tolerance", "standard_error", "passed", "informational"]


def float_format(precision: int) -> str:
    return f"%.{int(precision)}g"


def write_csv(frame: pd.DataFrame, path: Union[str, Path], precision: int) -> Path:
    """CSV с фиксированным порядком колонок, точностью и переводами строк LF"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=float_format(precision), lineterminator="\n")
    logger.debug("💾 %s: %d строк", path, len(frame))
    return path


def curve_frame(curve: DiscountCurve, maturities: Sequence[float]) -> pd.DataFrame:
    """(T, P_0T, f_0T, rho_0(T))"""
    grid = np.asarray(maturities, dtype=float)
    return pd.DataFrame({
        "T": grid,
        "P": np.asarray(curve.discount(grid), dtype=float),
        "f": np.asarray(curve.initial_forward_rate(grid), dtype=float),
        "rho": np.asarray(curve.density(grid), dtype=float),
    }, columns=CURVE_COLUMNS)


def path_frames(bundles: Iterable[PathBundle]) -> List[pd.DataFrame]:
    """Один DataFrame (t, xi, P, r, alive) на путь, в порядке блоков; после кризиса P = 0"""
    frames = []
    for bundle in bundles:
        for sample in bundle:
            frames.append(pd.DataFrame({
                "t": sample.times,
                "xi": sample.xi,
                "P": np.where(sample.alive, sample.bond, 0.0),
                "r": sample.short_rate,
                "alive": sample.alive.astype(int),
            }, columns=PATH_COLUMNS))
    return frames


def quotes_frame(quotes: Sequence[OptionQuote], labels: Sequence[str]) -> pd.DataFrame:
    rows = []
    for quote, label in zip(quotes, labels):
        rows.append({
            "instrument": quote.instrument.value,
            "label": label,
            "method": quote.method.value,
            "price": quote.price,
            "standard_error": np.nan if quote.standard_error is None else quote.standard_error,
            "boundary": int(quote.boundary),
            "critical_value": np.nan if quote.critical_value is None else quote.critical_value,
        })
    return pd.DataFrame(rows, columns=QUOTE_COLUMNS)


def diagnostics_frame(reports: Sequence[DiagnosticReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        for check in report.checks:
            rows.append({
                "report": report.name,
                **check.to_row(),
                "standard_error": np.nan if check.standard_error is None else check.standard_error,
                "passed": int(check.passed),
                "informational": int(check.informational),
            })
    return pd.DataFrame(rows, columns=DIAGNOSTIC_COLUMNS)


def format_table(frame: pd.DataFrame, precision: int) -> str:
    """Текстовая таблица для stdout"""
    if frame.empty:
        return "(пусто)"
    return frame.to_string(index=False, float_format=lambda v: float_format(precision) % v)


def format_report(reports: Sequence[DiagnosticReport], precision: int = 6) -> str:
    """Текстовый отчёт диагностики: по блоку на вид проверки"""
    lines = []
    for report in reports:
        status = "PASS" if report.passed else "FAIL"
        lines.append(f"== {report.name}: {status} (путей: {report.n_paths})")
        for check in report.checks:
            mark = "info" if check.informational else ("ok" if check.passed else "FAIL")
            se = "" if check.standard_error is None else f" se={check.standard_error:.{precision}g}"
            lines.append(
                f"  [{mark:>4}] {check.name}: {check.value:.{precision}g} "
                f"(цель {check.target:.{precision}g}, допуск {check.tolerance:.{precision}g}{se})"
            )
        for key, value in sorted(report.stats.items()):
            lines.append(f"  {key} = {value:.{precision}g}")
    return "\n".join(lines) + "\n"


__all__ = [
    "CURVE_COLUMNS",
    "PATH_COLUMNS",
    "QUOTE_COLUMNS",
    "DIAGNOSTIC_COLUMNS",
    "float_format",
    "write_csv",
    "curve_frame",
    "path_frames",
    "quotes_frame",
    "diagnostics_frame",
    "format_table",
    "format_report",
]
