"""Variance-bound factor of a backward-sampling schedule.

For a schedule ``eps_0, ..., eps_{r-1}`` indexed by selection count, the
factor is

    (1/r) * sum_{m<r} sum_{l<=m} prod_{j=l..m} 1 / (1 + eps_j)

which stays bounded iff backward sampling recurs regularly.  The inner sum
obeys ``S_m = (1 + S_{m-1}) / (1 + eps_m)`` so the whole factor is O(r).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SelectionSchedule:
    epsilon: tuple[int, ...]

    def __post_init__(self):
        eps = tuple(int(e) for e in self.epsilon)
        if any(e < 0 for e in eps):
            raise ValueError("schedule entries must be non-negative")
        object.__setattr__(self, "epsilon", eps)

    def __len__(self):
        return len(self.epsilon)


def schedule_factor(schedule) -> float:
    eps = schedule.epsilon if isinstance(schedule, SelectionSchedule) else schedule
    eps = np.asarray(eps, dtype=float)
    if eps.size == 0:
        raise ValueError("empty schedule")
    inner = 0.0
    total = 0.0
    for e in eps:
        inner = (1.0 + inner) / (1.0 + e)
        total += inner
    return total / eps.size


def periodic_schedule(delta: int, length: int) -> SelectionSchedule:
    """``eps_j = 1`` iff ``j = k * delta - 1`` for some ``k >= 1``."""
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")
    j = np.arange(length)
    return SelectionSchedule(tuple(((j + 1) % delta == 0).astype(int)))


def periodic_limit(delta: int, r_n: int) -> float:
    """Factor of the period-``delta`` schedule; tends to ``(3 delta - 1) / 2``."""
    return schedule_factor(periodic_schedule(delta, r_n))
