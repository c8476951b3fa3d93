#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Эволюция информационного процесса и выбор момента кризиса X
"""
import logging
from dataclasses import replace
from typing import Tuple, Union

import numpy as np

from core.curve import DiscountCurve
from core.exceptions import DomainError, SurvivalError
from models.enums import ProcessKind
from models.information import MarketState, ModelSpec, PhiFunction

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def phi_eval(phi: PhiFunction, x: ArrayLike):
    return phi(x)


def evolve_information(
    spec: ModelSpec,
    state: MarketState,
    x_draw: float,
    dt: float,
    noise: float,
) -> MarketState:
    """
    Один шаг по времени при известном X.

    noise: стандартная нормальная величина (броуновские модели) или
    приращение стандартного гамма-процесса (гамма-модель).
    """
    if not dt > 0.0:
        raise DomainError(f"Шаг по времени должен быть положительным: {dt}")
    if not state.alive:
        raise SurvivalError(f"Состояние t={state.t:g} уже за моментом кризиса")
    t_next = state.t + dt
    alive = t_next <= x_draw

    if spec.process is ProcessKind.GAMMA:
        if noise < 0.0:
            raise DomainError("Приращение гамма-процесса не может быть отрицательным")
        return replace(state, t=t_next, xi=state.xi + x_draw * noise, alive=alive)

    rate = spec.rate_at(state.t)
    dxi = rate * float(spec.phi(x_draw)) * dt + np.sqrt(dt) * noise
    return MarketState(
        t=t_next,
        xi=state.xi + dxi,
        eta=state.eta + rate * dxi,
        tau=state.tau + rate * rate * dt,
        alive=alive,
    )


def advance_paths(
    spec: ModelSpec,
    t: float,
    xi: np.ndarray,
    eta: np.ndarray,
    tau: float,
    phi_x: np.ndarray,
    dt: float,
    z: np.ndarray,
    drift_scale: float = 1.0,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """
    Векторный шаг броуновской информации по всем путям (левая точка).
    Возвращает (dxi, xi, eta, tau) после шага.
    """
    rate = spec.rate_at(t)
    dxi = drift_scale * rate * phi_x * dt + np.sqrt(dt) * z
    return dxi, xi + dxi, eta + rate * dxi, tau + rate * rate * dt


def draw_crisis_time(curve: DiscountCurve, u: ArrayLike):
    """X = X(u): обратное преобразование, так как P_0T = Q(X >= T)"""
    arr = np.asarray(u, dtype=float)
    if np.any(~(arr > 0.0)) or np.any(~(arr < 1.0)):
        raise DomainError("u должно лежать в (0, 1)")
    return curve.inverse_discount(u)


def draw_gamma_increments(rng: np.random.Generator, m: float, dt: float, size) -> np.ndarray:
    """Приращения стандартного гамма-процесса: Gamma(shape=m dt, scale=1)"""
    if not dt > 0.0:
        raise DomainError(f"Шаг по времени должен быть положительным: {dt}")
    return rng.gamma(m * dt, 1.0, size=size)


__all__ = [
    "phi_eval",
    "evolve_information",
    "advance_paths",
    "draw_crisis_time",
    "draw_gamma_increments",
]
