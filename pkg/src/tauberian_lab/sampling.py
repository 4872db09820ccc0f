"""Deterministic random generators for property suites and searches.

All randomness flows through numpy Generators seeded as (seed, task label),
so independent tasks of one run draw from decoupled streams and results do
not depend on scheduling.
"""

from __future__ import annotations

import zlib
from fractions import Fraction

import numpy as np

from .geometry import Box, BoxFamily, sorted_decreasing


def rng_for(seed: int, label: str) -> np.random.Generator:
    """Generator seeded by (seed, stable hash of label)."""
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode())])


def random_box(rng: np.random.Generator, dim: int, denom: int = 16,
               span: int = 4, max_side: int = 2) -> Box:
    """Box with dyadic coordinates: centers in [0, span], sides in (0, max_side]."""
    center = tuple(Fraction(int(rng.integers(0, span * denom + 1)), denom)
                   for _ in range(dim))
    side = Fraction(int(rng.integers(1, max_side * denom + 1)), denom)
    return Box(center, side)


def random_family(rng: np.random.Generator, dim: int, count: int,
                  decreasing: bool = True, **kw) -> BoxFamily:
    boxes = [random_box(rng, dim, **kw) for _ in range(count)]
    if decreasing:
        return sorted_decreasing(boxes)
    return BoxFamily(boxes)


def random_grid_cube_family(rng: np.random.Generator, n: int, dim: int,
                            count: int, max_side: int | None = None) -> BoxFamily:
    """Grid-aligned cubes on the N^n grid over [0,1)^n, sorted decreasing."""
    max_side = max_side or max(1, n // 2)
    boxes = []
    for _ in range(count):
        side = int(rng.integers(1, max_side + 1))
        corner = tuple(int(rng.integers(0, n - side + 1)) for _ in range(dim))
        center = tuple(Fraction(2 * c + side, 2 * n) for c in corner)
        boxes.append(Box(center, Fraction(side, n)))
    return sorted_decreasing(boxes)
