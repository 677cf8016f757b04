"""Additive state functionals ``h_{n+1}(x_{0:n+1}) = h_n(x_{0:n}) + h~_n(x_n, x_{n+1})``.

All functionals are vector valued with a trailing axis of length ``dim`` so
several statistics can share one particle system.  ``increment`` broadcasts
over its two state arguments, which lets the FFBSm update evaluate all
``N x N`` pairs in one call.
"""
from __future__ import annotations

import abc

import numpy as np


class AdditiveFunctional(abc.ABC):
    dim: int

    @abc.abstractmethod
    def initial_term(self, x0) -> np.ndarray:
        """``h_0`` evaluated elementwise; shape ``x0.shape + (dim,)``."""

    @abc.abstractmethod
    def increment(self, n: int, x, x_next) -> np.ndarray:
        """``h~_n(x, x')``; shape ``broadcast(x, x').shape + (dim,)``."""


class StateSumFunctional(AdditiveFunctional):
    """``h_n(x_{0:n}) = x_0 + ... + x_n``."""

    dim = 1

    def initial_term(self, x0):
        return np.asarray(x0, dtype=float)[..., None]

    def increment(self, n, x, x_next):
        x_next = np.asarray(x_next, dtype=float)
        shape = np.broadcast_shapes(np.shape(x), x_next.shape)
        if shape != x_next.shape:
            x_next = np.broadcast_to(x_next, shape)
        return x_next[..., None]


class SvTripleFunctional(AdditiveFunctional):
    """Sums of ``x_{m+1}``, ``x_{m+1}^2`` and ``x_m x_{m+1}``.

    The initial term is ``(x_0, x_0^2, 0)``.
    """

    dim = 3

    def initial_term(self, x0):
        x0 = np.asarray(x0, dtype=float)
        return np.stack([x0, x0**2, np.zeros_like(x0)], axis=-1)

    def increment(self, n, x, x_next):
        x, x_next = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(x_next, dtype=float))
        return np.stack([x_next, x_next**2, x * x_next], axis=-1)


FUNCTIONALS = {
    "state_sum": StateSumFunctional,
    "sv_triple": SvTripleFunctional,
}


def evaluate_path(f: AdditiveFunctional, path) -> np.ndarray:
    """Evaluate ``h_n`` on a full path ``(x_0, ..., x_n)`` by unrolling the recursion."""
    path = np.asarray(path, dtype=float)
    if path.ndim != 1 or path.size == 0:
        raise ValueError("path must be a non-empty 1-d sequence")
    total = np.array(f.initial_term(path[0]), dtype=float)
    for m in range(path.size - 1):
        total = total + f.increment(m, path[m], path[m + 1])
    return total
