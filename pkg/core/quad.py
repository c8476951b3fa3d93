#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Численное ядро: хвостовые интегралы по rho_0, гауссовы интегралы,
монотонный поиск корня, нормальная функция распределения.

Все интегралы вида int_T^inf rho_0(x) g(x) dx берутся заменой p = P_{0x}:
плотность поглощается мерой dp, интервал становится конечным [0, P_{0T}],
и хвост плотности не усекается.
"""
import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize, special

from core.curve import DiscountCurve
from core.exceptions import BracketingError, DomainError, QuadratureError

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]
Scalar = Union[float, np.ndarray]

GAUSSIAN_SPAN = 12.0
KINK_REFINEMENT = 48


@dataclass(frozen=True)
class QuadratureSpec:
    """Параметры квадратуры"""
    nodes: int = 256
    refinement: int = 8
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    hermite_nodes: int = 200
    panel_order: int = 16
    grading_depth: int = 40

    def __post_init__(self):
        if self.nodes < 16:
            raise DomainError(f"Число узлов должно быть >= 16, получено {self.nodes}")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise DomainError("Допуски квадратуры должны быть положительными")
        if self.refinement < 0 or self.panel_order < 2 or self.hermite_nodes < 2:
            raise DomainError("Некорректные параметры уточнения квадратуры")

    @property
    def panels(self) -> int:
        return max(1, self.nodes // self.panel_order)


@dataclass(frozen=True)
class RootSpec:
    """Параметры поиска корня"""
    abs_tol: float = 1e-13
    rel_tol: float = 1e-15
    max_doublings: int = 60
    max_iterations: int = 500


@dataclass(frozen=True)
class TailRule:
    """Фиксированное правило: sum(weights * g(nodes)) ~ int_lower^inf rho_0 g"""
    lower: float
    nodes: np.ndarray
    weights: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        return values @ self.weights


DEFAULT_QUADRATURE = QuadratureSpec()
DEFAULT_ROOT = RootSpec()


# -------------------------------------------------
# Узлы
# -------------------------------------------------
@lru_cache(maxsize=64)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    knots, weights = np.polynomial.legendre.leggauss(n)
    knots.setflags(write=False)
    weights.setflags(write=False)
    return knots, weights


@lru_cache(maxsize=16)
def gauss_hermite(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Узлы и веса Гаусса-Эрмита для стандартной нормальной плотности"""
    knots, weights = np.polynomial.hermite.hermgauss(n)
    knots = knots * np.sqrt(2.0)
    weights = weights / np.sqrt(np.pi)
    knots.setflags(write=False)
    weights.setflags(write=False)
    return knots, weights


def gauss_legendre(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Узлы и веса Гаусса-Лежандра на [a, b]"""
    knots, weights = _legendre(n)
    return 0.5 * (b - a) * knots + 0.5 * (b + a), 0.5 * (b - a) * weights


def graded_breaks(upper: float, panels: int, depth: int) -> np.ndarray:
    """Геометрическое сгущение панелей к нулю: 0, upper*2^-depth, ..., upper"""
    if panels <= 1:
        return np.array([0.0, upper])
    exponents = np.linspace(-float(depth), 0.0, panels)
    return np.concatenate([[0.0], upper * np.exp2(exponents)])


# -------------------------------------------------
# Адаптивная составная квадратура Гаусса-Лежандра
# -------------------------------------------------
def _evaluate(f: Integrand, x: np.ndarray) -> np.ndarray:
    values = np.asarray(f(x), dtype=float)
    if values.ndim == 0:
        values = np.full(x.shape, float(values))
    if not np.all(np.isfinite(values)):
        raise QuadratureError("Подынтегральная функция вернула нечисловое значение")
    return values


def _panel_sums(f: Integrand, panels: Sequence[Tuple[np.ndarray, np.ndarray]], order: int) -> List[np.ndarray]:
    knots, weights = _legendre(order)
    blocks = []
    for lo, hi in panels:
        half = 0.5 * (hi - lo)
        blocks.append(((0.5 * (hi + lo))[:, None] + half[:, None] * knots[None, :], half))
    abscissae = np.concatenate([nodes.ravel() for nodes, _ in blocks])
    values = _evaluate(f, abscissae)
    sums, offset = [], 0
    for nodes, half in blocks:
        size = nodes.size
        chunk = values[..., offset:offset + size].reshape(values.shape[:-1] + nodes.shape)
        sums.append((chunk @ weights) * half)
        offset += size
    return sums


def integrate_panels(f: Integrand, breaks: np.ndarray, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> Scalar:
    """
    Глобально-адаптивная квадратура по панелям breaks.

    f векторизована: массив абсцисс (n,) -> массив (..., n); поддерживаются
    векторные подынтегральные функции (сходимость по худшей компоненте).
    Панель оценивается правилом порядка q и суммой по двум половинам;
    панели с наименьшей ошибкой принимаются, пока суммарная ошибка
    укладывается в допуск, остальные делятся пополам.
    """
    breaks = np.asarray(breaks, dtype=float)
    lo, hi = breaks[:-1], breaks[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return 0.0

    accepted: Scalar = 0.0
    used = 0.0
    previous = last = None
    for _ in range(spec.refinement + 1):
        mid = 0.5 * (lo + hi)
        coarse, left, right = _panel_sums(f, [(lo, hi), (lo, mid), (mid, hi)], spec.panel_order)
        fine = left + right
        estimate = accepted + fine.sum(axis=-1)
        previous, last = accepted + coarse.sum(axis=-1), estimate

        scale = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(estimate))
        err = np.abs(fine - coarse) / np.expand_dims(scale, -1)
        if err.ndim > 1:
            err = err.reshape(-1, err.shape[-1]).max(axis=0)

        order = np.argsort(err, kind="stable")
        ok = np.zeros(err.shape, dtype=bool)
        ok[order[np.cumsum(err[order]) <= 1.0 - used]] = True
        used += float(err[ok].sum())
        accepted = accepted + fine[..., ok].sum(axis=-1)
        if ok.all():
            return _scalar(accepted)
        lo, hi = np.concatenate([lo[~ok], mid[~ok]]), np.concatenate([mid[~ok], hi[~ok]])

    raise QuadratureError(
        f"Квадратура не сошлась за {spec.refinement} уровней уточнения",
        previous=_scalar(previous),
        last=_scalar(last),
    )


def _scalar(value: Scalar) -> Scalar:
    if np.ndim(value) == 0:
        return float(value)
    return value


def integrate_interval(f: Integrand, a: float, b: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> Scalar:
    """int_a^b f на spec.panels равных панелях с адаптивным уточнением"""
    return integrate_panels(f, np.linspace(a, b, spec.panels + 1), spec)


def tail_breaks(curve: DiscountCurve, lower: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """Панели в координате p: сгущение к нулю плюс образы изломов кривой"""
    upper = curve.discount(lower)
    breaks = graded_breaks(upper, spec.panels, spec.grading_depth)
    kinks = curve.kinks[curve.kinks > lower]
    if kinks.size:
        breaks = np.union1d(breaks, curve.discount(kinks))
    return breaks


def integrate_tail(g: Integrand, curve: DiscountCurve, lower: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> Scalar:
    """int_lower^inf rho_0(x) g(x) dx = int_0^{P_{0,lower}} g(X(p)) dp"""
    if lower < 0.0:
        raise DomainError(f"Нижний предел должен быть неотрицательным: {lower}")
    breaks = tail_breaks(curve, lower, spec)
    return integrate_panels(lambda p: g(curve.inverse_discount(p)), breaks, spec)


def tail_rule(curve: DiscountCurve, lower: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> TailRule:
    """Фиксированное правило из spec.nodes узлов для векторных расчётов по путям"""
    breaks = tail_breaks(curve, lower, spec)
    knots, weights = _legendre(spec.panel_order)
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    p = ((0.5 * (hi + lo))[:, None] + half[:, None] * knots[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return TailRule(lower=float(lower), nodes=np.asarray(curve.inverse_discount(p)), weights=w)


# -------------------------------------------------
# Нормальное распределение и гауссовы интегралы
# -------------------------------------------------
def normal_cdf(x: Scalar) -> Scalar:
    """N(x) через дополнительную функцию ошибок"""
    return _scalar(special.ndtr(x))


def log_normal_cdf(x: Scalar) -> Scalar:
    return _scalar(special.log_ndtr(x))


def gaussian_density(z: np.ndarray, mean: float, variance: float) -> np.ndarray:
    return np.exp(-0.5 * (z - mean) ** 2 / variance) / np.sqrt(2.0 * np.pi * variance)


def integrate_gaussian(
    h: Integrand,
    mean: float,
    variance: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    kinked: bool = False,
) -> Scalar:
    """
    E[h(Z)], Z ~ N(mean, variance).

    Гладкие h: Гаусс-Эрмит с удвоением числа узлов. Для h с изломом
    (положительная часть) kinked=True: адаптивный Лежандр на
    mean +- 12 sd с нормальной плотностью в подынтегральной функции.
    """
    if not variance > 0.0:
        raise DomainError(f"Дисперсия должна быть положительной: {variance}")
    sd = float(np.sqrt(variance))

    if kinked:
        span = GAUSSIAN_SPAN * sd
        breaks = np.linspace(mean - span, mean + span, 2 * int(GAUSSIAN_SPAN) + 1)
        # излом сужает только свою панель, поэтому уровней нужно больше
        kink_spec = replace(spec, refinement=max(spec.refinement, KINK_REFINEMENT))
        return integrate_panels(lambda z: _evaluate(h, z) * gaussian_density(z, mean, variance), breaks, kink_spec)

    def estimate(n: int) -> Scalar:
        knots, weights = gauss_hermite(n)
        return _evaluate(h, mean + sd * knots) @ weights

    n = spec.hermite_nodes
    previous = estimate(n)
    for _ in range(min(spec.refinement, 2)):
        n *= 2
        current = estimate(n)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(current))
        if np.all(np.abs(current - previous) <= tol):
            return _scalar(current)
        previous = current
    raise QuadratureError("Гаусс-Эрмит не сошёлся", previous=_scalar(previous), last=_scalar(current))


# -------------------------------------------------
# Монотонный поиск корня
# -------------------------------------------------
def find_root_monotone(
    f: Callable[[float], float],
    bracket_seed: Tuple[float, float],
    spec: RootSpec = DEFAULT_ROOT,
) -> float:
    """
    Корень монотонной f. Скобка расширяется геометрически (в 2 раза за шаг)
    в сторону меньшего |f|, пока не появится смена знака; затем Брент.
    """
    lo, hi = sorted(float(v) for v in bracket_seed)
    if hi == lo:
        hi = lo + 1.0
    f_lo, f_hi = f(lo), f(hi)
    for doubling in range(spec.max_doublings + 1):
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if np.sign(f_lo) != np.sign(f_hi):
            break
        if doubling == spec.max_doublings:
            raise BracketingError(
                f"Нет смены знака после {spec.max_doublings} удвоений скобки: f({lo:g})={f_lo:g}, f({hi:g})={f_hi:g}"
            )
        width = hi - lo
        if abs(f_hi) < abs(f_lo):
            hi += width
            f_hi = f(hi)
        elif abs(f_lo) < abs(f_hi):
            lo -= width
            f_lo = f(lo)
        else:
            lo, hi = lo - 0.5 * width, hi + 0.5 * width
            f_lo, f_hi = f(lo), f(hi)

    rtol = max(spec.rel_tol, 4.0 * np.finfo(float).eps)
    return float(optimize.brentq(f, lo, hi, xtol=spec.abs_tol, rtol=rtol, maxiter=spec.max_iterations))


__all__ = [
    "QuadratureSpec",
    "RootSpec",
    "TailRule",
    "DEFAULT_QUADRATURE",
    "DEFAULT_ROOT",
    "gauss_hermite",
    "gauss_legendre",
    "graded_breaks",
    "tail_breaks",
    "integrate_panels",
    "integrate_interval",
    "integrate_tail",
    "tail_rule",
    "normal_cdf",
    "log_normal_cdf",
    "gaussian_density",
    "integrate_gaussian",
    "find_root_monotone",
]
