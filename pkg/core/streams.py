#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Воспроизводимые потоки случайных чисел по блокам путей.

Блок b получает свой Philox-генератор из SeedSequence(seed, spawn_key=(b,)),
поэтому результат не зависит от числа рабочих потоков.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, List, Tuple, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")


def block_rng(seed: int, block: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(sequence))


def block_sizes(n_items: int, block_size: int) -> List[Tuple[int, int]]:
    """[(номер блока, размер блока), ...]; последний блок может быть короче"""
    if n_items < 1 or block_size < 1:
        raise ValueError("Число путей и размер блока должны быть положительными")
    full, rest = divmod(n_items, block_size)
    blocks = [(b, block_size) for b in range(full)]
    if rest:
        blocks.append((full, rest))
    return blocks


def map_blocks(
    worker: Callable[[np.random.Generator, int, int], T],
    seed: int,
    n_items: int,
    block_size: int,
    workers: int = 1,
) -> List[T]:
    """
    worker(rng, block, size) для каждого блока; результаты в порядке блоков.
    """
    blocks = block_sizes(n_items, block_size)

    def run(item: Tuple[int, int]) -> T:
        block, size = item
        return worker(block_rng(seed, block), block, size)

    if workers <= 1 or len(blocks) == 1:
        return [run(item) for item in blocks]
    logger.debug("🧵 %d блоков на %d потоках", len(blocks), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, blocks))


@dataclass(frozen=True)
class Moments:
    """Счётчик, среднее и сумма квадратов отклонений; merge ассоциативен"""
    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "Moments":
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(int(values.size), mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other: "Moments") -> "Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return Moments(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def standard_error(self) -> float:
        return float(np.sqrt(self.variance / self.n)) if self.n > 0 else float("nan")

    @property
    def total(self) -> float:
        return self.mean * self.n


def merge_all(items: Iterable[Moments]) -> Moments:
    return reduce(lambda a, b: a.merge(b), items, Moments())


__all__ = ["block_rng", "block_sizes", "map_blocks", "Moments", "merge_all"]
